from setuptools import setup

setup(
    name="shiftlab",
    version="1.0.0",
    description="Exact hyponormality and subnormality tests for 1- and 2-variable weighted shifts",
    python_requires=">=3.10",
    py_modules=[
        "config",
        "numerics",
        "measures",
        "shift1",
        "shift2",
        "families",
        "models",
        "verification_orchestrator",
        "main",
    ],
    install_requires=[
        "pydantic>=2.5.3",
        "numpy>=1.24.3",
        "mpmath>=1.3.0",
    ],
    extras_require={"test": ["pytest>=7.4.0", "hypothesis>=6.92.0"]},
    entry_points={"console_scripts": ["shiftlab=main:main"]},
)
