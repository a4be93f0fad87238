# BraidLab source package
