"""Small, fast experiment configs shared by the CLI and determinism tests."""

CONFIGS = {
    "trace": {"experiment": "trace", "scheme": "geomdec:3", "N": "limit", "t": {"min": 0, "max": 20, "count": 41}},
    "spectrum": {"experiment": "spectrum", "scheme": "geomdec:3", "N": 12, "depth": 8},
    "cantor": {"experiment": "cantor", "theta": 3, "depth": 6},
    "clt": {"experiment": "clt", "scheme": "constant:1", "N_list": [100, 1000, 10000], "t": {"min": 0, "max": 3, "count": 31}},
    "probe": {"experiment": "probe", "theta": "5/2", "n_max": 8},
    "decay": {"experiment": "decay", "p": 7, "q": 3, "windows": {"min": 3, "max": 7}, "samples_per_window": 256},
    "lyapunov": {"experiment": "lyapunov", "scheme": "geomgrow:2", "n": 500, "t": 1.0},
    "discrepancy": {"experiment": "discrepancy", "scheme": "linear:1", "n": 5000, "t": 4.442882938158366},
    "pisot_classify": {"experiment": "pisot_classify", "poly": [-1, -2, 1], "n_max": 30},
}
