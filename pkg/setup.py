from setuptools import setup, find_packages

setup(
    name="upg-kolchin",
    version="1.0.0",
    description="Exact computations with UPG outer automorphisms of free groups",
    package_dir={"": "backend/src"},
    packages=find_packages(where="backend/src"),
    python_requires=">=3.9",
    install_requires=[
        "sympy>=1.12",
        "networkx>=3.1",
        "typer>=0.9.0",
        "click>=8.1.7",
        "python-dotenv>=1.0.0",
        "pydantic>=2.0.0",
    ],
    entry_points={
        "console_scripts": ["upg-kolchin=upg_kolchin.main:cli"],
    },
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
    ],
)
