# Copyright (c) 2025, Williams.Wang. All rights reserved. Use restricted under LICENSE terms.

"""
Setup script for HoloVote
"""

from pathlib import Path

from setuptools import find_packages, setup

this_directory = Path(__file__).parent

# 开发与测试工具不作为运行时依赖安装
DEV_PACKAGES = {"mypy", "pytest", "hypothesis", "pip-audit"}


def read_requirements():
    """读取requirements.txt，拆分为运行时依赖和开发依赖"""
    requirements_file = this_directory / "requirements.txt"
    if not requirements_file.exists():
        return [], []

    runtime, dev = [], []
    for line in requirements_file.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        name = line.split(">")[0].split("=")[0].split("[")[0]
        (dev if name in DEV_PACKAGES else runtime).append(line)
    return runtime, dev


readme = this_directory / "README.md"
install_requires, dev_requires = read_requirements()

setup(
    name="holovote",
    version="1.0.0",
    author="Williams.Wang",
    description="A delegative (holographic) voting simulation engine and CLI",
    long_description=readme.read_text(encoding="utf-8") if readme.exists() else "",
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3",
        "Topic :: Scientific/Engineering",
        "Topic :: Sociology",
    ],
    python_requires=">=3.8",
    install_requires=install_requires,
    extras_require={"dev": dev_requires},
    entry_points={
        "console_scripts": [
            "holovote=src.cli.main:app",
        ],
    },
    zip_safe=False,
)
