# emacs: -*- mode: python-mode; py-indent-offset: 4; tab-width: 4; indent-tabs-mode: nil -*-
# vi: set ft=python sts=4 ts=4 sw=4 et:
#
# MFS documentation build configuration file.
import os
import sys
from datetime import datetime

sys.path.insert(0, os.path.abspath(os.path.pardir))

import mfs  # noqa: E402

# -- General configuration ------------------------------------------------

needs_sphinx = "3.5"

# generate autosummary even if no references
autosummary_generate = True
add_module_names = False

extensions = [
    "sphinx.ext.autodoc",  # standard
    "sphinx.ext.autosummary",  # standard
    "sphinx.ext.intersphinx",  # links code to other packages
    "sphinx.ext.mathjax",  # math in docstrings
    "sphinx.ext.napoleon",  # alternative to numpydoc
    "sphinx_copybutton",  # for copying code snippets
    "sphinxarg.ext",  # argparse
]

templates_path = ["_templates"]
source_suffix = ".rst"
master_doc = "index"

project = "MFS"
copyright = "2024-" + datetime.today().strftime("%Y") + ", MFS developers"
author = "MFS developers"

version = mfs.__version__
release = mfs.__version__

language = "en"
exclude_patterns = ["_build", "Thumbs.db", ".DS_Store"]
default_role = "autolink"
pygments_style = "default"

# -- Options for napoleon -------------------------------------------------

napoleon_google_docstring = False
napoleon_numpy_docstring = True
napoleon_include_init_with_doc = True
napoleon_include_private_with_doc = False
napoleon_use_ivar = True
napoleon_use_param = True
napoleon_use_rtype = True
napoleon_preprocess_types = False

# -- Options for HTML output ----------------------------------------------

html_theme = "sphinx_rtd_theme"
html_theme_options = {
    "includehidden": False,  # don't show hidden TOCs in sidebar
}
htmlhelp_basename = "mfsdoc"

# -- intersphinx ----------------------------------------------------------

_python_version_str = "{0.major}.{0.minor}".format(sys.version_info)
_python_doc_base = "https://docs.python.org/" + _python_version_str
intersphinx_mapping = {
    "python": (_python_doc_base, None),
    "numpy": ("https://numpy.org/doc/stable/", None),
    "scipy": ("https://docs.scipy.org/doc/scipy/reference", None),
    "pandas": ("https://pandas.pydata.org/pandas-docs/stable/", None),
}
