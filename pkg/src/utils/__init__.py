# BraidLab utilities
