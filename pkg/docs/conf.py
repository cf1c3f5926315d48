# This code is part of tollsim.
#
# (C) Copyright the tollsim developers 2024
#
# This code is licensed under the Apache License, Version 2.0. You may
# obtain a copy of this license in the LICENSE.txt file in the root directory
# of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
#
# Any modifications or derivative works of this code must retain this
# copyright notice, and modified files need to carry a notice indicating
# that they have been altered from the originals.

"""Sphinx documentation builder."""


project = "tollsim"
copyright = "2024, the tollsim developers"
author = "the tollsim developers"

# The short X.Y version
version = "0.1.0"
# The full version, including alpha/beta/rc tags
release = "0.1.0"

extensions = [
    "sphinx.ext.napoleon",
    "sphinx.ext.autodoc",
    "sphinx.ext.viewcode",
]
templates_path: list = []
html_static_path: list = []

autoclass_content = "both"
language = "en"

exclude_patterns = ["_build"]

pygments_style = "colorful"

add_module_names = False

modindex_common_prefix = ["tollsim."]

html_theme = "alabaster"
html_last_updated_fmt = "%Y/%m/%d"
