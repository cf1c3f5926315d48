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

"""Exception types raised by tollsim."""

from typing import Optional, Sequence, Union

import pydantic as pdt


class TollsimError(Exception):
    """Base class for all errors raised by this package."""


class ScenarioFormatError(TollsimError, ValueError):
    """An input file or configuration section is malformed."""

    @classmethod
    def from_validation_error(
        cls, exc: pdt.ValidationError, *, source: Optional[str] = None
    ) -> "ScenarioFormatError":
        """Render a pydantic validation error with record loci like ``links[3].freespeed``."""
        lines = [f"{format_locus(err['loc'])}: {err['msg']}" for err in exc.errors()]
        prefix = f"{source}: " if source else ""
        return cls(prefix + "; ".join(lines))


class RoutingError(TollsimError):
    """A route is missing, discontinuous, or cannot be found."""


class NoServiceError(RoutingError):
    """No direct transit line serves the requested trip."""


class PlanMismatchError(TollsimError):
    """The event stream does not match the plan being scored."""


class IncompleteRunError(TollsimError):
    """A run directory lacks one of the artifacts written by a completed run."""


class RunMismatchError(TollsimError):
    """Two runs cannot be compared (different seeds or networks)."""


class IterationError(TollsimError):
    """An error occurred inside the co-evolutionary loop."""

    def __init__(self, iteration: int, stage: str, cause: BaseException) -> None:
        super().__init__(f"iteration {iteration}, {stage}: {cause}")
        self.iteration = iteration
        self.stage = stage


def format_locus(loc: Sequence[Union[str, int]]) -> str:
    """Render a pydantic error location.

    Examples:
        >>> format_locus(("links", 3, "freespeed"))
        'links[3].freespeed'

        >>> format_locus(("__root__", 0, "plans", 1, "elements"))
        '[0].plans[1].elements'
    """
    out = ""
    for part in loc:
        if part == "__root__":
            continue
        if isinstance(part, int):
            out += f"[{part}]"
        else:
            out += f".{part}" if out else str(part)
    return out
