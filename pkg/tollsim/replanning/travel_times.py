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

import logging
from typing import Dict, Final, Iterable, List, Tuple

import numpy as np
import numpy.typing as npt

from tollsim.events import Event
from tollsim.network import Network
from tollsim.utils import HORIZON

LOG = logging.getLogger(__name__)

BIN_SIZE: Final = 900
"""Width of a travel time bin, in seconds."""

N_BINS: Final = HORIZON // BIN_SIZE


class TravelTimeField:
    """Experienced link travel times per 15-minute bin, free-flow where unobserved.

    Queries interpolate linearly between bin centers and are clamped at both ends of
    the horizon.
    """

    def __init__(self, net: Network, values: npt.NDArray[np.float64]) -> None:
        if values.shape != (len(net.links), N_BINS):
            raise ValueError(f"Expected {(len(net.links), N_BINS)} values, got {values.shape}.")

        self.link_index: Dict[str, int] = {link.id: index for index, link in enumerate(net.links)}
        self.values = values
        self._rows: List[List[float]] = values.tolist()

    @classmethod
    def free_flow(cls, net: Network) -> "TravelTimeField":
        free_flow = np.array([link.free_flow_time for link in net.links], dtype=np.float64)
        return cls(net, np.repeat(free_flow[:, np.newaxis], N_BINS, axis=1))

    def bin_value(self, link_id: str, bin_index: int) -> float:
        return self._rows[self.link_index[link_id]][bin_index]

    def travel_time(self, link_id: str, t: float) -> float:
        """Expected traversal time of `link_id` when entered at time `t`.

        Examples:
            >>> from tollsim.test.scenarios import line_network
            >>> net = line_network(["a", "b"], length=1000.0, free_speed=10.0)
            >>> ttf = TravelTimeField.free_flow(net)
            >>> ttf.values[0, 32] = 200.0
            >>> ttf = TravelTimeField(net, ttf.values)
            >>> ttf.travel_time("a-b", 8 * 3600 + 450), ttf.travel_time("a-b", 8 * 3600 + 900)
            (200.0, 150.0)
        """
        row = self._rows[self.link_index[link_id]]
        position = t / BIN_SIZE - 0.5
        if position <= 0.0:
            return row[0]
        if position >= N_BINS - 1:
            return row[-1]

        lower = int(position)
        fraction = position - lower
        return row[lower] + fraction * (row[lower + 1] - row[lower])


def build_travel_time_field(events: Iterable[Event], net: Network) -> TravelTimeField:
    """Average experienced link travel times, binned by link entry time.

    Bins without a completed traversal keep the free-flow travel time.
    """
    index = {link.id: i for i, link in enumerate(net.links)}
    totals = np.zeros((len(net.links), N_BINS), dtype=np.float64)
    counts = np.zeros((len(net.links), N_BINS), dtype=np.int64)

    entered: Dict[str, Tuple[str, int]] = {}
    for event in events:
        if event.kind == "link_enter" and event.link is not None:
            entered[event.person] = (event.link, event.time)
        elif event.kind == "link_leave" and event.person in entered:
            link_id, enter_time = entered.pop(event.person)
            if link_id != event.link:
                continue
            bin_index = min(enter_time // BIN_SIZE, N_BINS - 1)
            totals[index[link_id], bin_index] += event.time - enter_time
            counts[index[link_id], bin_index] += 1

    field = TravelTimeField.free_flow(net)
    observed = counts > 0
    field.values[observed] = totals[observed] / counts[observed]

    LOG.debug("Travel time field from %d observed link-bins", int(observed.sum()))
    return TravelTimeField(net, field.values)
