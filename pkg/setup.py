from setuptools import setup, find_packages

setup(
    name="braidlab",
    version="0.1.0",
    description="Presentations, RAAG constructions and Massey certificates for graph braid groups",
    packages=find_packages(include=["src", "src.*"]),
    py_modules=["main", "config"],
    install_requires=[
        "pydantic>=2.5.3",
        "python-dotenv>=1.0.0",
        "networkx>=3.2",
        "numpy>=1.26",
    ],
    extras_require={
        "test": ["pytest>=7.4.4", "sympy>=1.12"],
    },
    python_requires=">=3.10",
    entry_points={
        "console_scripts": [
            "braidlab=main:main",
        ],
    },
)
