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

import importlib.metadata
import platform
from typing import Final

try:
    TOLLSIM_VERSION: Final = importlib.metadata.version("tollsim")
except importlib.metadata.PackageNotFoundError:  # pragma: no cover
    TOLLSIM_VERSION = "0.0.0+unknown"  # type: ignore[misc]

__version__: Final = TOLLSIM_VERSION

PLATFORM: Final = " ".join(
    [
        f"tollsim/{TOLLSIM_VERSION}",
        f"({platform.system()}; {platform.python_implementation()}/{platform.python_version()})",
    ]
)
"""Version and platform string recorded in run metadata."""
