"""Named scenario presets shipped with the package."""

from importlib import resources

from .configio import scenario_from_text
from .core import ConfigurationError

PRESET_NAMES = (
    "fig2-single",
    "fig2-fifty",
    "fig3-type1",
    "fig3-type2",
    "fig3-type3",
    "fig4-scan",
    "fig4-thin",
    "fig5-scan",
)


def preset_text(name):
    if name not in PRESET_NAMES:
        raise ConfigurationError(
            f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}"
        )
    ref = resources.files(__package__).joinpath("presets", f"{name}.ini")
    return ref.read_text(encoding="utf-8")


def load_preset(name):
    """Returns (ScenarioConfig, ScheduleMeta) for a named preset."""
    return scenario_from_text(preset_text(name))
