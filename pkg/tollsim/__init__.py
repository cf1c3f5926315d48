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

from tollsim.network import Network, build_cordon, load_network
from tollsim.population import Person, Plan, load_population
from tollsim.runs import execute_run, load_run
from tollsim.scenario import ScenarioConfig, load_config, load_scenario
from tollsim.tolling import TollConfig, TollScheme
from tollsim.versions import __version__

__all__ = [
    "Network",
    "Person",
    "Plan",
    "ScenarioConfig",
    "TollConfig",
    "TollScheme",
    "__version__",
    "build_cordon",
    "execute_run",
    "load_config",
    "load_network",
    "load_population",
    "load_run",
    "load_scenario",
]
