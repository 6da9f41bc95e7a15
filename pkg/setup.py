import os
from setuptools import setup
import subprocess
from datetime import datetime

# Utility function to read the README file.
# Used for the long_description.
def read(fname):
    return open(os.path.join(os.path.dirname(__file__), fname))\
        .read().strip()

def run(args) :
    try:
        return subprocess.run(args, stdout=subprocess.PIPE, stderr=subprocess.DEVNULL).\
            stdout.decode('utf-8').splitlines()
    except OSError:
        return []

# Get current git branch (none when building from an archive)
branches = run(["git", "branch"])
curr_branch = next((line for line in branches if "*" in line), "")
curr_branch = curr_branch.replace(" ", "").replace("*", "")
version = read("VERSION")
name = "euler_cascade"

if curr_branch == "dev" :

    name += "_dev"

    start = datetime.strptime("2026-01-01", '%Y-%m-%d')
    now = datetime.now()

    min_diff = int((now-start).total_seconds() // 60)

    version += "." + str(min_diff) + "-dev"

setup(
    name = name,
    version = version,
    description = ("Autonomous multiscale SL(2) model of the growth of vorticity gradients for 2D Euler."),
    license = "BSD",
    keywords = "euler vorticity littlewood-paley biot-savart lie-group multiscale",
    packages=['euler_cascade'],
    long_description=read('README.md'),
    long_description_content_type='text/markdown',
    classifiers=[],
    python_requires='>=3.8',
    entry_points={
        'console_scripts': ['euler-cascade=euler_cascade.cli:main']},
    install_requires=[
        'numpy',
        'scipy>=1.6',
        'pandas>=1.5',
        'sympy',
        'tabulate']
)
