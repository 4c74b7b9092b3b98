"""INI-style pipeline configuration files.

Sections mirror module names; every key has a default; unknown sections or
keys are hard errors.
"""

from __future__ import annotations

import configparser
from pathlib import Path

from .audioproc import MfccConfig
from .core import FormatError
from .imageproc import HogConfig
from .pipeline import CardioPipelineConfig, ClotPipelineConfig
from .synththermal import ThermalConfig

_SCHEMA: dict[str, dict[str, type]] = {
    "synththermal": {
        "width": int, "height": int, "vessel_width": int, "base_temp": float,
        "axial_gradient": float, "clot_amplitude": float, "clot_sigma": float,
        "noise_sigma": float, "clot_margin": int,
    },
    "imageproc": {
        "canny_sigma": float, "canny_low": float, "canny_high": float,
        "intensity_blur_sigma": float,
        "cell_size": int, "block_size": int, "bins": int, "hog_view": str,
    },
    "audioproc": {
        "frame_len": float, "hop": float, "pre_emphasis": float,
        "n_filters": int, "n_coeffs": int, "log_floor": float,
        "denoise_levels": int,
    },
    "ml": {
        "svm_c": float, "svm_gamma": float, "n_trees": int, "max_depth": int,
        "min_samples_leaf": int, "mtry": int, "seed": int, "window": int,
    },
    "pipeline": {"task": str},
}


def _parse_file(path) -> dict[str, dict[str, object]]:
    parser = configparser.ConfigParser()
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise FormatError(f"cannot read config {path}: {exc}") from exc
    values: dict[str, dict[str, object]] = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise FormatError(f"unknown config section [{section}]")
        values[section] = {}
        for key, raw in parser.items(section):
            if key not in _SCHEMA[section]:
                raise FormatError(f"unknown config key {key!r} in [{section}]")
            typ = _SCHEMA[section][key]
            try:
                values[section][key] = raw if typ is str else typ(raw)
            except ValueError as exc:
                raise FormatError(f"bad value for {section}.{key}: {raw!r}") from exc
    return values


def _get(values, section, key, default):
    return values.get(section, {}).get(key, default)


def load_thermal_config(path=None) -> ThermalConfig:
    values = _parse_file(path) if path else {}
    sec = values.get("synththermal", {})
    return ThermalConfig(**sec)


def load_clot_config(path=None) -> ClotPipelineConfig:
    values = _parse_file(path) if path else {}
    hog = HogConfig(
        cell_size=_get(values, "imageproc", "cell_size", 8),
        block_size=_get(values, "imageproc", "block_size", 2),
        bins=_get(values, "imageproc", "bins", 9),
    )
    return ClotPipelineConfig(
        canny_sigma=_get(values, "imageproc", "canny_sigma", 1.4),
        canny_low=_get(values, "imageproc", "canny_low", 0.05),
        canny_high=_get(values, "imageproc", "canny_high", 0.15),
        intensity_blur_sigma=_get(values, "imageproc", "intensity_blur_sigma", 3.0),
        hog=hog,
        svm_c=_get(values, "ml", "svm_c", 10.0),
        svm_gamma=_get(values, "ml", "svm_gamma", 0.15),
        window=_get(values, "ml", "window", 5),
        hog_view=_get(values, "imageproc", "hog_view", "both"),
    )


def load_cardio_config(path=None) -> CardioPipelineConfig:
    values = _parse_file(path) if path else {}
    mfcc = MfccConfig(
        frame_len=_get(values, "audioproc", "frame_len", 0.025),
        hop=_get(values, "audioproc", "hop", 0.010),
        pre_emphasis=_get(values, "audioproc", "pre_emphasis", 0.97),
        n_filters=_get(values, "audioproc", "n_filters", 26),
        n_coeffs=_get(values, "audioproc", "n_coeffs", 13),
        log_floor=_get(values, "audioproc", "log_floor", 1e-10),
    )
    return CardioPipelineConfig(
        mfcc=mfcc,
        denoise_levels=_get(values, "audioproc", "denoise_levels", 4),
        n_trees=_get(values, "ml", "n_trees", 100),
        max_depth=_get(values, "ml", "max_depth", 12),
        min_samples_leaf=_get(values, "ml", "min_samples_leaf", 2),
        mtry=_get(values, "ml", "mtry", None),
        seed=_get(values, "ml", "seed", 0),
        task=_get(values, "pipeline", "task", "lung"),
    )


def clot_config_snapshot(cfg: ClotPipelineConfig) -> dict:
    return {
        "pipeline": "clot",
        "canny_sigma": cfg.canny_sigma,
        "canny_low": cfg.canny_low,
        "canny_high": cfg.canny_high,
        "intensity_blur_sigma": cfg.intensity_blur_sigma,
        "cell_size": cfg.hog.cell_size,
        "block_size": cfg.hog.block_size,
        "bins": cfg.hog.bins,
        "svm_c": cfg.svm_c,
        "svm_gamma": cfg.svm_gamma,
        "window": cfg.window,
        "hog_view": cfg.hog_view,
    }


def cardio_config_snapshot(cfg: CardioPipelineConfig) -> dict:
    return {
        "pipeline": "cardio",
        "frame_len": cfg.mfcc.frame_len,
        "hop": cfg.mfcc.hop,
        "pre_emphasis": cfg.mfcc.pre_emphasis,
        "n_filters": cfg.mfcc.n_filters,
        "n_coeffs": cfg.mfcc.n_coeffs,
        "log_floor": cfg.mfcc.log_floor,
        "denoise_levels": cfg.denoise_levels,
        "n_trees": cfg.n_trees,
        "max_depth": cfg.max_depth,
        "min_samples_leaf": cfg.min_samples_leaf,
        "mtry": cfg.mtry,
        "seed": cfg.seed,
        "task": cfg.task,
    }


def clot_config_from_snapshot(snap: dict) -> ClotPipelineConfig:
    return ClotPipelineConfig(
        canny_sigma=snap.get("canny_sigma", 1.4),
        canny_low=snap.get("canny_low", 0.05),
        canny_high=snap.get("canny_high", 0.15),
        intensity_blur_sigma=snap.get("intensity_blur_sigma", 3.0),
        hog=HogConfig(
            cell_size=snap.get("cell_size", 8),
            block_size=snap.get("block_size", 2),
            bins=snap.get("bins", 9),
        ),
        svm_c=snap.get("svm_c", 10.0),
        svm_gamma=snap.get("svm_gamma", 0.15),
        window=snap.get("window", 5),
        hog_view=snap.get("hog_view", "both"),
    )


def cardio_config_from_snapshot(snap: dict) -> CardioPipelineConfig:
    return CardioPipelineConfig(
        mfcc=MfccConfig(
            frame_len=snap.get("frame_len", 0.025),
            hop=snap.get("hop", 0.010),
            pre_emphasis=snap.get("pre_emphasis", 0.97),
            n_filters=snap.get("n_filters", 26),
            n_coeffs=snap.get("n_coeffs", 13),
            log_floor=snap.get("log_floor", 1e-10),
        ),
        denoise_levels=snap.get("denoise_levels", 4),
        n_trees=snap.get("n_trees", 100),
        max_depth=snap.get("max_depth", 12),
        min_samples_leaf=snap.get("min_samples_leaf", 2),
        mtry=snap.get("mtry"),
        seed=snap.get("seed", 0),
        task=snap.get("task", "lung"),
    )
