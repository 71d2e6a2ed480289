"""Built-in example runs, exposed through ``lattice-embed demo``"""

from typing import Dict, List

DEMOS: Dict[str, dict] = {
    "plane": {
        "lattice": {"kind": "box", "lower": [0, 0, 1], "upper": [4, 4, 1]},
        "manifold": {"kind": "plane", "normal": [0.0, 0.0, 1.0], "offset": 0.0},
        "fields": {"activation": {"epsilon": 0.25}},
        "objective": {"alpha": 1.0, "beta": 1.0, "gamma": 0.0},
        "output": {"prefix": "plane"},
    },
    "sphere": {
        "lattice": {"kind": "box", "lower": [-1, -1, -1], "upper": [1, 1, 1]},
        "manifold": {"kind": "sphere", "center": [0.0, 0.0, 0.0], "radius": 1.0},
        "fields": {"activation": {"epsilon": 0.5}},
        "objective": {"alpha": 1.0, "beta": 1.0, "gamma": 1.0},
        "output": {"prefix": "sphere"},
    },
    "torus": {
        # (0, 0, 1) sits on the symmetry axis, where every point of the top circle is closest
        "lattice": {"kind": "box", "lower": [-3, -3, 1], "upper": [3, 3, 1], "exclude": [[0, 0, 1]]},
        "manifold": {"kind": "torus", "center": [0.0, 0.0, 0.0], "major_radius": 2.0, "minor_radius": 0.5},
        "fields": {"activation": {"epsilon": 0.5}},
        "objective": {"alpha": 1.0, "beta": 1.0, "gamma": 1.0, "kappa_w": 0.1},
        "output": {"prefix": "torus"},
    },
    "reinforced-cylinder": {
        "lattice": {"kind": "box", "lower": [-2, -2, 0], "upper": [2, 2, 2]},
        "manifold": {"kind": "cylinder", "center": [0.0, 0.0, 0.0], "axis": [0.0, 0.0, 1.0], "radius": 1.0},
        "fields": {
            "activation": {"epsilon": 0.5},
            "reinforcement": {"regions": [{"kind": "box", "lower": [0.0, -2.0, 0.0], "upper": [2.0, 2.0, 2.0]}]},
        },
        "objective": {"alpha": 1.0, "beta": 1.0, "lambda": 1.0, "gamma": 0.5},
        "output": {"prefix": "cylinder", "formats": ["yaml", "markdown"]},
    },
}


def demo_names() -> List[str]:
    return sorted(DEMOS)


def demo_config(name: str) -> dict:
    if name not in DEMOS:
        raise KeyError(f"Unknown demo '{name}', choose from {', '.join(demo_names())}")
    return DEMOS[name]
