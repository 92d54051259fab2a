"""Command-line front end.

Subcommands
    interference  coincidence fringe map behind a two-slit mask
    image         polarization-sensitive ghost image of a phase pattern
    montecarlo    gated-camera count emulation with background subtraction
    chsh          Bell-test S value for given angles and visibility
    validate      self-check suite; nonzero exit on any failure
    amplitude     biphoton amplitude sampled along a line

Configuration is a flat key=value text file (SI units; angles in degrees).
Precedence: built-in defaults < --config file < command-line flags.  Every
file-writing run also writes a ``*_config.txt`` echo of the fully resolved
configuration so runs can be diffed and reproduced.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .biphoton import (
    QuadSettings,
    SourceParams,
    closed_form_amplitude,
    quadrature_oracle_amplitude,
)
from .detector import DetectorConfig, build_ghost_image
from .errors import ConfigError, GhostsimError
from .experiments import (
    DoubleSlit,
    ghost_image_map,
    ghost_interference_map,
    half_plane_pattern,
    uniform_pattern,
)
from .grids import GridSpec
from .io import load_pattern, parse_config, save_map, save_matrix_text, write_config_echo
from .optics import LensSystem, ghost_magnification
from .polarization import VisibilityModel, chsh_S, make_bell

# Overall object-to-camera image scale of the hardware bench being modeled;
# the lens alone gives m = v/(s1+s2), the remainder is the relay telescope
# between the lens image plane and the camera.
RELAY_TOTAL_SCALE = 0.87

_SOURCE_KEYS = dict(
    wavelength=810e-9,
    sigma=3e-3,
    pump_waist=1e-3,
    s1=1.33,
)

_INTERFERENCE_DEFAULTS = dict(
    _SOURCE_KEYS,
    s2=1.0,
    slit_separation=2e-3,
    slit_width=0.0,
    slit_center=0.0,
    axis="x",
    nx=512,
    ny=128,
    extent_x=6e-3,
    extent_y=2e-3,
    center_x=0.0,
    center_y=0.0,
)

# 0.0 means "derive": image_distance from the lens equation, nodes from the
# aperture sampling rule, telescope_scale from RELAY_TOTAL_SCALE, and the
# grid extent from the scaled pattern extent.
_IMAGE_DEFAULTS = dict(
    _SOURCE_KEYS,
    s2=1.5,
    focal_length=1.5,
    object_distance=2.83,
    image_distance=0.0,
    aperture_radius=25e-3,
    delta1=-45.0,
    delta2=-45.0,
    pattern="",
    phase_scale=np.pi,
    pattern_n=128,
    pattern_phi=180.0,
    pattern_extent_x=4e-3,
    pattern_extent_y=4e-3,
    nx=256,
    ny=256,
    extent_x=0.0,
    extent_y=0.0,
    center_x=0.0,
    center_y=0.0,
    nodes=0,
    telescope_scale=0.0,
    workers=1,
)

_MONTECARLO_DEFAULTS = dict(
    _IMAGE_DEFAULTS,
    trigger_rate=2e4,
    gate_width=10e-9,
    gate_delay=20e-9,
    exposure=1800.0,
    pair_detection_prob=0.1,
    dark_rate=0.0,
    seed=0,
)

_CHSH_DEFAULTS = dict(
    state="psi_minus",
    a=0.0,
    a_prime=45.0,
    b=22.5,
    b_prime=67.5,
    visibility=1.0,
)

_AMPLITUDE_DEFAULTS = dict(
    _SOURCE_KEYS,
    s2=1.0,
    axis="x",
    samples=201,
    extent=6e-3,
    fixed=0.0,
    x2=0.0,
    y2=0.0,
    oracle=0,
    nodes=0,
)

_ALL_KEYS = (
    _INTERFERENCE_DEFAULTS.keys()
    | _MONTECARLO_DEFAULTS.keys()
    | _CHSH_DEFAULTS.keys()
    | _AMPLITUDE_DEFAULTS.keys()
)


# --- configuration resolution -------------------------------------------------

def _coerce(key: str, text: str, defaults: dict):
    ref = defaults[key]
    try:
        if isinstance(ref, int) and not isinstance(ref, bool):
            return int(text)
        if isinstance(ref, float):
            return float(text)
    except ValueError:
        kind = "integer" if isinstance(ref, int) else "number"
        raise ConfigError(f"key '{key}': expected {kind}, got '{text}'")
    return text


def resolve_config(defaults: dict, args: argparse.Namespace) -> dict:
    """Merge defaults, --config file entries, and explicit flags.

    One config file may drive several subcommands, so keys used only by a
    different subcommand are ignored here; keys unknown to every subcommand
    are typos and rejected.
    """
    resolved = dict(defaults)
    if args.config:
        for key, text in parse_config(args.config).items():
            if key not in defaults:
                if key in _ALL_KEYS:
                    continue
                raise ConfigError(f"unknown configuration key '{key}'")
            resolved[key] = _coerce(key, text, defaults)
    for key in defaults:
        value = getattr(args, key, None)
        if value is not None:
            resolved[key] = value
    return resolved


def _add_config_flags(sub: argparse.ArgumentParser, defaults: dict) -> None:
    sub.add_argument("--config", help="flat key=value configuration file")
    sub.add_argument("--out", default=".", help="output directory (default: .)")
    for key, ref in defaults.items():
        flag = "--" + key.replace("_", "-")
        if isinstance(ref, int) and not isinstance(ref, bool):
            sub.add_argument(flag, type=int, default=None)
        elif isinstance(ref, float):
            sub.add_argument(flag, type=float, default=None)
        else:
            sub.add_argument(flag, default=None)


def _outputs(args: argparse.Namespace, stem: str):
    os.makedirs(args.out, exist_ok=True)
    return (
        os.path.join(args.out, stem + ".txt"),
        os.path.join(args.out, stem + ".pgm"),
        os.path.join(args.out, stem + "_config.txt"),
    )


def _source(cfg: dict) -> SourceParams:
    return SourceParams(
        wavelength=cfg["wavelength"],
        sigma=cfg["sigma"],
        s1=cfg["s1"],
        s2=cfg["s2"],
        w=cfg["pump_waist"],
    )


def _lens(cfg: dict) -> LensSystem:
    v = cfg["image_distance"] if cfg["image_distance"] > 0 else None
    return LensSystem(
        f=cfg["focal_length"],
        u=cfg["object_distance"],
        v=v,
        aperture_radius=cfg["aperture_radius"],
    )


def _pattern(cfg: dict):
    extent = (cfg["pattern_extent_x"], cfg["pattern_extent_y"])
    if cfg["pattern"]:
        return load_pattern(cfg["pattern"], phase_scale=cfg["phase_scale"], extent=extent)
    return half_plane_pattern(
        n=cfg["pattern_n"],
        extent=cfg["pattern_extent_x"],
        phi=np.deg2rad(cfg["pattern_phi"]),
    )


def _image_pieces(cfg: dict):
    """Resolve the shared image/montecarlo geometry; fills derived entries."""
    params = _source(cfg)
    lens = _lens(cfg)
    cfg["image_distance"] = lens.v
    pattern = _pattern(cfg)
    m = ghost_magnification(params, lens)
    if cfg["telescope_scale"] <= 0:
        cfg["telescope_scale"] = RELAY_TOTAL_SCALE / m
    total = m * cfg["telescope_scale"]
    if cfg["extent_x"] <= 0:
        cfg["extent_x"] = total * cfg["pattern_extent_x"]
    if cfg["extent_y"] <= 0:
        cfg["extent_y"] = total * cfg["pattern_extent_y"]
    grid = GridSpec(
        nx=cfg["nx"],
        ny=cfg["ny"],
        extent_x=cfg["extent_x"],
        extent_y=cfg["extent_y"],
        center=(cfg["center_x"], cfg["center_y"]),
    )
    quad = QuadSettings(nodes=cfg["nodes"] if cfg["nodes"] > 0 else None)
    return params, lens, pattern, grid, quad


def _image_map(cfg: dict, pattern=None):
    params, lens, pat, grid, quad = _image_pieces(cfg)
    if pattern is not None:
        pat = pattern
    return ghost_image_map(
        params,
        lens,
        pat,
        np.deg2rad(cfg["delta1"]),
        np.deg2rad(cfg["delta2"]),
        grid,
        quad=quad,
        telescope_scale=cfg["telescope_scale"],
        workers=cfg["workers"],
    )


# --- subcommands --------------------------------------------------------------

def cmd_interference(args: argparse.Namespace) -> int:
    cfg = resolve_config(_INTERFERENCE_DEFAULTS, args)
    params = _source(cfg)
    slit = DoubleSlit(
        d=cfg["slit_separation"],
        axis=cfg["axis"],
        slit_width=cfg["slit_width"],
        center=cfg["slit_center"],
    )
    grid = GridSpec(
        nx=cfg["nx"],
        ny=cfg["ny"],
        extent_x=cfg["extent_x"],
        extent_y=cfg["extent_y"],
        center=(cfg["center_x"], cfg["center_y"]),
    )
    cmap = ghost_interference_map(params, slit, grid)
    txt, pgm, echo = _outputs(args, "interference")
    save_map(cmap, txt, fmt="matrix-text")
    save_map(cmap, pgm, fmt="graymap")
    write_config_echo(echo, cfg)
    print(f"wrote {txt}, {pgm}")
    return 0


def cmd_image(args: argparse.Namespace) -> int:
    cfg = resolve_config(_IMAGE_DEFAULTS, args)
    cmap = _image_map(cfg)
    txt, pgm, echo = _outputs(args, "image")
    save_map(cmap, txt, fmt="matrix-text")
    save_map(cmap, pgm, fmt="graymap")
    write_config_echo(echo, cfg)
    print(f"wrote {txt}, {pgm}")
    return 0


def cmd_montecarlo(args: argparse.Namespace) -> int:
    cfg = resolve_config(_MONTECARLO_DEFAULTS, args)
    signal = _image_map(cfg)
    # The background run images a flat (no-pattern) plane at the same
    # polarizer settings, mirroring the subtraction procedure at the camera.
    flat = uniform_pattern(
        n=cfg["pattern_n"], extent=cfg["pattern_extent_x"], phi=0.0
    )
    background = _image_map(cfg, pattern=flat)
    det = DetectorConfig(
        trigger_rate=cfg["trigger_rate"],
        gate_width=cfg["gate_width"],
        gate_delay=cfg["gate_delay"],
        exposure=cfg["exposure"],
        pair_detection_prob=cfg["pair_detection_prob"],
        dark_rate=cfg["dark_rate"],
        seed=cfg["seed"],
    )
    frame = build_ghost_image(signal, background, det, workers=cfg["workers"])
    txt, pgm, echo = _outputs(args, "montecarlo")
    save_map(frame, txt, fmt="matrix-text")
    save_map(frame, pgm, fmt="graymap")
    write_config_echo(echo, cfg)
    gates = frame.meta["signal_gates"] + frame.meta["background_gates"]
    print(f"wrote {txt}, {pgm} ({gates} gates over two exposures)")
    return 0


def cmd_chsh(args: argparse.Namespace) -> int:
    cfg = resolve_config(_CHSH_DEFAULTS, args)
    state = make_bell(cfg["state"])
    value = chsh_S(
        state,
        np.deg2rad(cfg["a"]),
        np.deg2rad(cfg["a_prime"]),
        np.deg2rad(cfg["b"]),
        np.deg2rad(cfg["b_prime"]),
        vis=VisibilityModel(V=cfg["visibility"]),
    )
    print(f"S = {value:.4f}")
    return 0


def cmd_amplitude(args: argparse.Namespace) -> int:
    cfg = resolve_config(_AMPLITUDE_DEFAULTS, args)
    params = _source(cfg)
    if cfg["axis"] not in ("x", "y"):
        raise ConfigError(f"axis must be 'x' or 'y', got '{cfg['axis']}'")
    coords = np.linspace(-cfg["extent"] / 2, cfg["extent"] / 2, cfg["samples"])
    if cfg["axis"] == "x":
        x1, y1 = coords, cfg["fixed"]
    else:
        x1, y1 = cfg["fixed"], coords
    if cfg["oracle"]:
        quad = QuadSettings(nodes=cfg["nodes"] if cfg["nodes"] > 0 else None)
        phi = quadrature_oracle_amplitude(params, x1, y1, cfg["x2"], cfg["y2"], quad)
    else:
        phi = closed_form_amplitude(params, x1, y1, cfg["x2"], cfg["y2"])
    phi = np.broadcast_to(phi, coords.shape)
    table = np.column_stack([coords, phi.real, phi.imag, np.abs(phi)])
    txt, _, echo = _outputs(args, "amplitude")
    meta = dict(cfg, columns=f"{cfg['axis']}1 re im abs")
    save_matrix_text(txt, table, meta)
    write_config_echo(echo, cfg)
    print(f"wrote {txt}")
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    from .validate import run_all

    return run_all()


# --- parser -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ghostsim",
        description="Ghost interference and ghost imaging simulator "
        "for hyper-entangled photon pairs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "interference", help="two-slit coincidence fringe map"
    )
    _add_config_flags(p, _INTERFERENCE_DEFAULTS)
    p.set_defaults(func=cmd_interference)

    p = sub.add_parser(
        "image", help="ghost image of a polarization-sensitive phase pattern"
    )
    _add_config_flags(p, _IMAGE_DEFAULTS)
    p.set_defaults(func=cmd_image)

    p = sub.add_parser(
        "montecarlo", help="gated-camera count accumulation with subtraction"
    )
    _add_config_flags(p, _MONTECARLO_DEFAULTS)
    p.set_defaults(func=cmd_montecarlo)

    p = sub.add_parser("chsh", help="print the Bell-test S value")
    _add_config_flags(p, _CHSH_DEFAULTS)
    p.set_defaults(func=cmd_chsh)

    p = sub.add_parser("validate", help="run the self-check suite")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("amplitude", help="dump the amplitude along a line")
    _add_config_flags(p, _AMPLITUDE_DEFAULTS)
    p.set_defaults(func=cmd_amplitude)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except GhostsimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
