from setuptools import setup, find_packages

setup(
    name="qcauchy",
    version="0.1.0",
    description="Restricted Cauchy identities, q-Whittaker / Schur measures and Fredholm determinant checks",
    packages=find_packages(where="src"),
    package_dir={"": "src"},
    python_requires=">=3.8",
    install_requires=[
        "pydantic>=2.5.2",
        "numpy>=1.24.3",
    ],
    extras_require={
        "dev": [
            "pytest>=7.4.3",
            "black>=23.11.0",
            "flake8>=6.1.0",
        ],
    },
    entry_points={
        "console_scripts": [
            "qcauchy=qcauchy.cli.main:main",
        ],
    },
)
