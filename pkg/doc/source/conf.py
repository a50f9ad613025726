# -*- coding: utf-8 -*-
#
# ergocert documentation build configuration file.

import os
import sys

sys.path.insert(0, os.path.abspath("../../src"))

extensions = ['sphinx.ext.autodoc',
    'sphinx.ext.intersphinx',
    'sphinx.ext.coverage',
    'sphinx.ext.mathjax',
    'sphinx.ext.viewcode']

templates_path = ['_templates']

source_suffix = '.rst'

master_doc = 'index'

project = u'ergocert'
copyright = u'2026, ergocert developers'
author = u'ergocert developers'

version = u'0.3.0'
release = u'0.3.0'

language = None

exclude_patterns = []

pygments_style = 'sphinx'

todo_include_todos = False

html_theme = 'alabaster'

html_static_path = ['_static']

html_sidebars = {
    '**': [
        'relations.html',
        'searchbox.html',
    ]
}

htmlhelp_basename = 'ergocertdoc'

latex_documents = [
    (master_doc, 'ergocert.tex', u'ergocert Documentation',
     author, 'manual'),
]

man_pages = [
    (master_doc, 'ergocert', u'ergocert Documentation',
     [author], 1)
]

texinfo_documents = [
    (master_doc, 'ergocert', u'ergocert Documentation',
     author, 'ergocert', 'Certified ergotropy bounds from partial measurements.',
     'Miscellaneous'),
]

intersphinx_mapping = {
    'python': ('https://docs.python.org/3', None),
    'numpy': ('https://numpy.org/doc/stable/', None),
}
