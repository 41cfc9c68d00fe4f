import codecs
import os
from setuptools import setup
import sys


version_info = sys.version_info
if version_info < (3, 8):
    sys.stdout.write("xlit requires python 3.8 or later.\n")
    sys.exit(1)


setup(
    name="xlit",
    use_scm_version=True,
    description="Evaluate language models on romanized prompts.",
    long_description_content_type="text/markdown",
    long_description=codecs.open(
        os.path.join(os.path.dirname(os.path.realpath(__file__)), "README.md"),
        "rb",
        "utf-8",
    ).read(),
    license="MIT",
    packages=["xlit"],
    package_data={"xlit": ["tables/*.tsv", "templates/*.txt"]},
    entry_points={"console_scripts": ["xlit=xlit.cli:main"]},
    setup_requires=["setuptools_scm"],
    install_requires=["pokrok", "httpx", "numpy", "fonttools"],
    tests_require=["pytest", "pytest-cov"],
    python_requires=">=3.8",
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "Topic :: Scientific/Engineering :: Artificial Intelligence",
        "Topic :: Text Processing :: Linguistic",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3 :: Only",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
    ],
)
