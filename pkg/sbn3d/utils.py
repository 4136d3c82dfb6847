"""
Helpers shared by the driver: setup files, timing and the status file
"""
import os
import configparser
import importlib.util

_TIME_UNITS = (('seconds', 60.), ('minutes', 60.), ('hours', None))


def load_setup_file(path, name='sbn3d_setup'):
    """Execute a Python setup file and return it as a module

    Args:
        path (str): setup file, e.g. ``example_scenes/rayleigh_ellipses.py``
        name (str): module name the file is executed under

    Raises:
        FileNotFoundError: ``path`` is not a file
        ImportError: the file cannot be loaded as Python source
    """

    if not os.path.isfile(path):
        raise FileNotFoundError("setup file {} does not exist".format(path))
    loader_spec = importlib.util.spec_from_file_location(name, path)
    if loader_spec is None or loader_spec.loader is None:
        raise ImportError("cannot load {} as a python module".format(path))
    setup = importlib.util.module_from_spec(loader_spec)
    loader_spec.loader.exec_module(setup)
    return setup


def time_print(seconds):
    """(value, units) for an elapsed time, in the largest unit under 60"""

    value = float(seconds)
    for units, size in _TIME_UNITS:
        if size is None or value <= size:
            break
        value /= size
    return value, units


def save_status(statfile, section, statevars):
    """Merge ``statevars`` into one section of an INI status file

    Existing sections and keys are kept; values are stored as strings.
    """

    status = load_status(statfile)
    if not status.has_section(section):
        status.add_section(section)
    for key, val in statevars.items():
        status.set(section, key, str(val))
    with open(statfile, 'w') as f:
        status.write(f)


def load_status(statfile):
    """Status file as a RawConfigParser; empty if the file is missing"""

    status = configparser.RawConfigParser()
    status.read(statfile)
    return status
