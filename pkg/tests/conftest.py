import pytest

from thzris.atmosphere import AtmosphericConditions
from thzris.data import scene_path
from thzris.geometry import Vec3
from thzris.propagation import Material
from thzris.ris import RisPanel, panel_frame
from thzris.scene import HumanBlocker, Node, Scene, build_grid, room_shell_surfaces
from thzris.scenario import load_scenario

FIXTURE = str(scene_path("sitting_room.json"))

# Flat-response test material: n_t = 1.55, alpha = 45/m across the THz band.
PLASTER = Material(
    name="plaster",
    points=((1e9, 1.55, 45.0), (2000e9, 1.55, 45.0)),
    roughness_m=0.0,
)

TABLE_CONDITIONS = AtmosphericConditions(293.15, 101.325, relative_humidity=0.43)


def make_room(
    size=(6.0, 5.0, 2.5),
    obstacles=(),
    nodes=None,
    panels=(),
    f_hz=300e9,
    material=PLASTER,
    blocker=HumanBlocker(),
):
    """Bare rectangular room with plaster shell; nodes default to one TX/RX."""
    room = Vec3(*size)
    if nodes is None:
        nodes = (
            Node("TX", Vec3(1.0, 2.5, 2.0), 20.0, "tx"),
            Node("RX", Vec3(5.0, 2.5, 1.0), 10.0, "rx"),
        )
    return Scene(
        room=room,
        surfaces=room_shell_surfaces(room, "plaster"),
        obstacles=tuple(obstacles),
        blocker=blocker,
        nodes=tuple(nodes),
        ris_panels=tuple(panels),
        atmosphere=TABLE_CONDITIONS,
        frequency_hz=f_hz,
        materials={"plaster": material},
    )


def make_panel(panel_id="p1", center=(0.0, 2.5, 1.5), normal=(1, 0, 0),
               m=64, n=64, pitch_wl=0.35, f_hz=300e9, amplitude=1.0, bits=0):
    from scipy.constants import c

    lam = c / f_hz
    nrm, u, v = panel_frame(normal)
    return RisPanel(
        id=panel_id,
        center=Vec3(*center),
        normal=nrm,
        axis_u=u,
        axis_v=v,
        m_columns=m,
        n_rows=n,
        d_x=pitch_wl * lam,
        d_y=pitch_wl * lam,
        amplitude=amplitude,
        phase_bits=bits,
        pitch_wavelengths=(pitch_wl, pitch_wl),
    )


@pytest.fixture(scope="session")
def fixture_scene():
    scene, config = load_scenario(FIXTURE)
    return scene, config


@pytest.fixture(scope="session")
def fixture_grid(fixture_scene):
    scene, _ = fixture_scene
    return build_grid(scene, 0.1, 0.2)
