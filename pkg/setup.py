from setuptools import setup, find_packages
import re


def get_property(prop, project):
    result = re.search(r'{}\s*=\s*[\'"]([^\'"]*)[\'"]'.format(prop),
                       open(project + '/__init__.py').read())
    return result.group(1)


reqs = []
for line in open('requirements.txt', 'r').readlines():
    if not line.startswith('pytest'):
        reqs.append(line)

setup(
    name="sbn3d",
    version=get_property('__version__', 'sbn3d'),
    description="Sparse + low-rank + noise decomposition of moving-shadow video",
    packages=find_packages(),
    package_data={'sbn3d': ['templates/*.md']},
    data_files=[
        (
            'sbn3d_example_scenes',
            [
                'example_scenes/rayleigh_ellipses.py',
                'example_scenes/long_crossing.json',
            ]
        )
    ],
    entry_points={'console_scripts': ['sbn3d=sbn3d.cli:main']},
    install_requires=reqs,
    include_package_data=True
)
