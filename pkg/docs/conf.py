# -*- coding: utf-8 -*-
#
# This file is part of ergodic-ensembles.
# Copyright (C) 2026 ergodic-ensembles contributors.
#
# ergodic-ensembles is free software; you can redistribute it and/or modify it
# under the terms of the MIT License; see LICENSE file for more details.

from ergodic_ensembles import __version__

# -- General configuration ------------------------------------------------

# Do not warn on external images.
suppress_warnings = ["image.nonlocal_uri"]

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.coverage",
    "sphinx.ext.doctest",
    "sphinx.ext.intersphinx",
    "sphinx.ext.mathjax",
    "sphinx.ext.viewcode",
]

templates_path = ["_templates"]

source_suffix = ".rst"

master_doc = "index"

project = "ergodic-ensembles"
copyright = "2026, ergodic-ensembles contributors"
author = "ergodic-ensembles contributors"

release = __version__

language = "en"

exclude_patterns = []

pygments_style = "sphinx"

todo_include_todos = False

# -- Options for HTML output ----------------------------------------------

html_theme = "alabaster"

html_theme_options = {
    "description": "Ergodicity of closed-loop ensembles of stochastic agents.",
    "github_button": False,
    "github_banner": False,
    "show_powered_by": False,
}

html_sidebars = {
    "**": [
        "about.html",
        "navigation.html",
        "relations.html",
        "searchbox.html",
    ]
}

htmlhelp_basename = "ergodic-ensembles_namedoc"

# -- Options for LaTeX output ---------------------------------------------

latex_elements = {}

latex_documents = [
    (
        master_doc,
        "ergodic-ensembles.tex",
        "ergodic-ensembles Documentation",
        author,
        "manual",
    ),
]

# -- Options for manual page output ---------------------------------------

man_pages = [
    (master_doc, "ergodic-ensembles", "ergodic-ensembles Documentation", [author], 1)
]

# -- Options for Texinfo output -------------------------------------------

texinfo_documents = [
    (
        master_doc,
        "ergodic-ensembles",
        "ergodic-ensembles Documentation",
        author,
        "ergodic-ensembles",
        "Ergodicity of closed-loop ensembles of stochastic agents.",
        "Miscellaneous",
    ),
]

intersphinx_mapping = {
    "python": ("https://docs.python.org/", None),
    "numpy": ("https://numpy.org/doc/stable/", None),
    "scipy": ("https://docs.scipy.org/doc/scipy/", None),
}

autoclass_content = "both"
