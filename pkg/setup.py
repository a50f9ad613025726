#!/usr/bin/env python
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#
import re
import sys

from setuptools import setup

try:
    from setuptools.command.test import test as TestCommand
except ImportError:
    # setuptools 72 removed the test command
    TestCommand = None

cmdclass = {}

if TestCommand is not None:

    class PyTest(TestCommand):
        def finalize_options(self):
            TestCommand.finalize_options(self)
            self.test_args = []
            self.test_suite = True

        def run_tests(self):
            # import here, cause outside the eggs aren't loaded
            import pytest

            errno = pytest.main(self.test_args)
            sys.exit(errno)

    cmdclass["test"] = PyTest


with open('src/ergocert/__init__.py', 'r') as fd:
    version = re.search(r'^__version__\s*=\s*[\'"]([^\'"]*)[\'"]',
                        fd.read(), re.MULTILINE).group(1)

setup(
    name="ergocert",
    version=version,
    description="Certified lower bounds on ergotropy from partial measurement data",
    license="Apache 2.0",
    packages=["ergocert", "ergocert.model", "ergocert.harness"],
    package_dir={"": "src"},
    package_data={"ergocert": ["templates/*.txt"]},
    classifiers=[
        "Development Status :: 4 - Beta",
        "License :: OSI Approved :: Apache Software License",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Topic :: Scientific/Engineering :: Physics"],
    extras_require={
        'docs': ['Sphinx', 'sphinx-autobuild', 'alabaster'],
        'quality': ['pylama', 'isort', 'eradicate', 'mypy', 'black', 'bandit'],
    },
    install_requires=[
        "numpy>=1.20",
        "scipy>=1.6",
        "cvxopt>=1.2.6",
        "jinja2",
        "pyyaml",
        ],
    tests_require=[
        "pytest", "hypothesis"
        ],
    entry_points={
        "console_scripts": ["ergocert=ergocert.harness.cli:main"],
    },
    python_requires=">=3.8",
    zip_safe=False,
    cmdclass=cmdclass,
    )
