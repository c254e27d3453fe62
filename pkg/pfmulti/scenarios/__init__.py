# Scenario drivers, one per benchmark family
from pfmulti.scenarios import corrosion, diffusion, hydraulic, hydrogen, quenching
from pfmulti.scenarios.base import ScenarioRun, build_mesh, build_schedule

SCENARIOS = {
    "diffusion": diffusion.build,
    "quenching": quenching.build,
    "pressurized_crack": hydraulic.build_pressurized_crack,
    "injection": hydraulic.build_injection,
    "hydrogen_plate": hydrogen.build,
    "pit_free": corrosion.build_pit_free,
    "pit_scc": corrosion.build_pit_scc,
}

__all__ = ["SCENARIOS", "ScenarioRun", "build_mesh", "build_schedule"]
