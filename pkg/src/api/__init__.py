# Command-line surface and pydantic models
