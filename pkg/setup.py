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
    try :
        return subprocess.run(args, stdout=subprocess.PIPE, stderr=subprocess.DEVNULL).\
            stdout.decode('utf-8').splitlines()
    except OSError :
        return []

# Get current git branch, if any
branches = run(["git", "branch"])
curr_branch = next((line for line in branches if "*" in line), "")
curr_branch = curr_branch.replace(" ", "").replace("*", "")
version = read("VERSION")
name = "iot_contracts"

if curr_branch == "dev" :

    name += "_dev"

    start = datetime.strptime("2024-01-01", '%Y-%m-%d')
    now = datetime.now()

    min_diff = int((now-start).total_seconds() // 60)

    version += "." + str(min_diff) + "-dev"

setup(
    name = name,
    version = version,
    description = ("Usage based and revenue sharing contracts between a smart product manufacturer and an IoT platform : "
                   "printed equilibria, numerical Stackelberg oracle, comparative statics and proposition checks."),
    license = "BSD",
    keywords = "stackelberg game-theory supply-chain contracts overconfidence IoT",
    packages=['iot_contracts'],
    long_description=read('README.md'),
    long_description_content_type='text/markdown',
    classifiers=[],
    python_requires='>=3.8',
    install_requires=[
        'tabulate',
        'pandas>=1.5',
        'numpy>=1.20',
        'scipy>=1.7',
        'sympy',
        'SALib>=1.4'],
    extras_require={
        'test' : ['pytest', 'hypothesis']},
    entry_points={
        'console_scripts' : ['iot-contracts=iot_contracts.cli:run']}
)
