from setuptools import setup, find_packages

setup(
    name="blowup_lab",
    version="0.1.0",
    packages=find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    python_requires=">=3.9",
    install_requires=[
        "numpy>=1.24",
        "scipy>=1.10",
        "pandas>=2.0",
        "psutil>=5.9.0",
        "rich>=13.4.0",
        "textual>=0.40.0",
        "typing-extensions>=4.5.0",
    ],
    entry_points={
        "console_scripts": [
            "blowup-lab=blowup_lab.main:main",
        ],
    },
)
