# -*- coding: utf-8 -*-
#
# sbn3d documentation build configuration file.
#
# This file is execfile()d with the current directory set to its
# containing dir.

import os
import sys

import matplotlib
matplotlib.use('agg')

sys.path.insert(0, os.path.abspath('..'))

import sbn3d

# -- General configuration ------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.doctest',
    'sphinx.ext.mathjax',
    'sphinx.ext.napoleon',
    'sphinx.ext.viewcode',
]

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

# General information about the project.
project = u'sbn3d'
copyright = u'2026, the sbn3d developers'
author = u'the sbn3d developers'

# The short X.Y version.
version = '.'.join(sbn3d.__version__.split('.')[:-1])
# The full version, including alpha/beta/rc tags.
release = sbn3d.__version__

language = 'en'
exclude_patterns = ['_build']
pygments_style = 'sphinx'
todo_include_todos = False

# -- Options for HTML output ----------------------------------------------

html_theme = 'sphinx_rtd_theme'
htmlhelp_basename = 'sbn3ddoc'

# -- Options for LaTeX output ---------------------------------------------

latex_elements = {
}

latex_documents = [
  (master_doc, 'sbn3d.tex', u'sbn3d Documentation', author, 'manual'),
]

man_pages = [
    (master_doc, 'sbn3d', u'sbn3d Documentation', [author], 1)
]

texinfo_documents = [
  (master_doc, 'sbn3d', u'sbn3d Documentation',
   author, 'sbn3d', 'Sparse + low-rank + noise decomposition of moving-shadow video.',
   'Miscellaneous'),
]
