# -*- coding: utf-8 -*-

import setuptools
from pathlib import Path

# define constants
INSTALL_REQUIRES = (Path(__file__).parent / "requirements.txt").read_text().splitlines()

readme_file = Path(__file__).parent / "README.md"
readme = readme_file.read_text(encoding="utf-8")

setuptools.setup(
    name='geodl-kit',
    author="geodl-kit developers",
    use_scm_version={'write_to': 'geodl/_version.py', 'fallback_version': '0.1.0'},
    description="Geodesic-flow knowledge distillation for class-incremental learning",
    setup_requires=['setuptools_scm'],
    long_description=readme,
    long_description_content_type="text/markdown",
    python_requires=">=3.8",
    packages=[
        "geodl",
        "geodl/entrypoint",
        "geodl/geodesic",
        "geodl/nn",
        "geodl/op",
        "geodl/select",
        "geodl/task",
        "geodl/tools",
        "geodl/utils",
    ],
    classifiers=[
        "Programming Language :: Python :: 3.8",
        "License :: OSI Approved :: GNU Lesser General Public License v3 (LGPLv3)",
    ],
    keywords='incremental learning knowledge distillation grassmann geodesic flow',
    install_requires=INSTALL_REQUIRES,

    entry_points={
        "console_scripts": [
            "geodl = geodl.entrypoint.main:main"
        ]
    },
)
