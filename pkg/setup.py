from setuptools import find_packages
from setuptools import setup


setup(
    name='klein-systolic',
    version='0.1.0',
    packages=find_packages(exclude=['tests']),
    install_requires=[
        'djangorestframework>=3.9,<4.0',
        'semver>=2.10',
        'numpy>=1.20',
        'scipy>=1.6',
    ],
    extras_require={
        'test': [
            'pytest>=6.0',
        ],
    },
    entry_points={
        'console_scripts': [
            'klein-systolic=klein_systolic.cli:main',
        ],
    },
)
