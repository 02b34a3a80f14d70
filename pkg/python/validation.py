import logging
from typing import Dict

import pandas as pd
from pandas.api.types import is_bool_dtype, is_numeric_dtype

from errors import ValidationError

logger = logging.getLogger(__name__)

# -------------------------
# RESULT SCHEMAS
# -------------------------
# monotone: "increasing" (strict) or "non-increasing"; checked only when the
# table is a single sweep along that column (q_table, curves, gain_curve).
RESULT_SCHEMAS = {
    "q_table": {
        "required_columns": {"a", "q", "residual"},
        "allow_nulls": set(),
        "floats": {"a", "q", "residual"},
        "min_values": {"a": 0.0, "q": 0.5, "residual": 0.0},
        "max_values": {"a": 1.0},
        "monotone": {"a": "increasing", "q": "non-increasing"},
    },
    "equilibria": {
        "required_columns": {"a1", "a2", "q1", "q2", "residual", "kind", "converged", "message"},
        "allow_nulls": set(),
        "floats": {"a1", "a2", "q1", "q2", "residual"},
        "allowed_values": {"kind": {"trivial-FS", "interior"}},
        "min_values": {"a1": 0.0, "a2": 0.0, "q1": 0.5, "q2": 0.5, "residual": 0.0},
        "max_values": {"a1": 1.0, "a2": 1.0},
    },
    "simulate": {
        "required_columns": {"player", "fdm_freq", "mean_utility", "mean_fs_utility", "stderr"},
        "allow_nulls": {"stderr"},   # a single trial has no batch spread
        "ints": {"player"},
        "floats": {"fdm_freq", "mean_utility", "mean_fs_utility", "stderr"},
        "allowed_values": {"player": {1, 2}},
        "min_values": {"fdm_freq": 0.0, "mean_utility": 0.0, "mean_fs_utility": 0.0, "stderr": 0.0},
        "max_values": {"fdm_freq": 1.0},
    },
    "gain_curve": {
        "required_columns": {"isr_db", "isr", "snr_p1", "snr_p2", "gain_db_p1", "gain_db_p2"},
        "allow_nulls": set(),
        "floats": {"isr_db", "isr", "snr_p1", "snr_p2", "gain_db_p1", "gain_db_p2"},
        "min_values": {"isr": 0.0, "gain_db_p1": -1e-9, "gain_db_p2": -1e-9},
        "monotone": {"isr": "increasing"},
    },
    "disagreement": {
        "required_columns": {"scale_db", "rate", "stderr"},
        "allow_nulls": set(),
        "floats": {"scale_db", "rate", "stderr"},
        "min_values": {"rate": 0.0, "stderr": 0.0},
        "max_values": {"rate": 1.0},
        "monotone": {"scale_db": "increasing"},
    },
    "sweep": {
        "required_columns": {"value", "n_interior", "point", "a1", "a2", "q1", "q2", "residual", "converged", "error"},
        "allow_nulls": {"point", "a1", "a2", "q1", "q2", "residual", "converged", "error"},
        "ints": {"n_interior"},
        "floats": {"a1", "a2", "q1", "q2", "residual"},
        "min_values": {"n_interior": 0, "a1": 0.0, "a2": 0.0, "q1": 0.5, "q2": 0.5, "residual": 0.0},
        "max_values": {"a1": 1.0, "a2": 1.0},
    },
    "curves": {
        "required_columns": {"a", "r1", "r2"},
        "allow_nulls": set(),
        "floats": {"a", "r1", "r2"},
        "min_values": {"a": 0.0, "r1": 0.0, "r2": 0.0},
        "max_values": {"a": 1.0, "r1": 1.0, "r2": 1.0},
        "monotone": {"a": "increasing"},
    },
    "br_map": {
        "required_columns": {"snr", "isr", "exact_fdm", "threshold_fdm", "agree"},
        "allow_nulls": set(),
        "floats": {"snr", "isr"},
        "bools": {"exact_fdm", "threshold_fdm", "agree"},
        "min_values": {"snr": 0.0, "isr": 0.0},
    },
    "epsilon": {
        "required_columns": {"player", "a_hat", "a_tilde", "epsilon", "disagreement", "gap_bound", "samples"},
        "allow_nulls": set(),
        "ints": {"player", "samples"},
        "floats": {"a_hat", "a_tilde", "epsilon", "disagreement", "gap_bound"},
        "min_values": {"a_hat": 0.0, "a_tilde": 0.0, "epsilon": 0.0, "disagreement": 0.0, "gap_bound": 0.0},
        "max_values": {"a_hat": 1.0, "a_tilde": 1.0, "disagreement": 1.0},
    },
}


# -------------------------
# VALIDATION HELPERS
# -------------------------
def _fail(msg: str) -> None:
    logger.error(f"❌ {msg}")

def _warn(msg: str) -> None:
    logger.warning(f"⚠️  {msg}")

def _ok(msg: str) -> None:
    logger.info(f"✅ {msg}")

def validate_schema(name: str, df: pd.DataFrame) -> bool:
    schema = RESULT_SCHEMAS[name]
    ok = True

    required = schema["required_columns"]
    cols = set(df.columns)

    missing = required - cols
    extra = cols - required

    if missing:
        _fail(f"[{name}] Missing columns: {sorted(missing)}")
        ok = False
    if extra:
        _warn(f"[{name}] Extra columns (unexpected): {sorted(extra)}")

    return ok

def validate_nulls(name: str, df: pd.DataFrame) -> bool:
    schema = RESULT_SCHEMAS[name]
    ok = True
    allow_nulls = schema.get("allow_nulls", set())

    for col in schema["required_columns"]:
        if col not in df.columns:
            continue
        if col not in allow_nulls and df[col].isna().any():
            n = int(df[col].isna().sum())
            _fail(f"[{name}] Nulls not allowed in '{col}' (found {n})")
            ok = False

    return ok

def validate_dtypes(name: str, df: pd.DataFrame) -> bool:
    schema = RESULT_SCHEMAS[name]
    ok = True

    for col in schema.get("ints", set()) | schema.get("floats", set()):
        if col not in df.columns or df[col].isna().all():
            continue
        if is_bool_dtype(df[col]) or not is_numeric_dtype(df[col]):
            _fail(f"[{name}] '{col}' dtype is {df[col].dtype}, expected numeric")
            ok = False

    for col in schema.get("ints", set()):
        if col not in df.columns:
            continue
        values = df[col].dropna()
        if is_numeric_dtype(values) and not (values == values.round()).all():
            _fail(f"[{name}] '{col}' has non-integer values")
            ok = False

    for col in schema.get("bools", set()):
        if col in df.columns and not is_bool_dtype(df[col]):
            _fail(f"[{name}] '{col}' dtype is {df[col].dtype}, expected bool")
            ok = False

    return ok

def validate_allowed_values(name: str, df: pd.DataFrame) -> bool:
    schema = RESULT_SCHEMAS[name]
    ok = True

    for col, allowed in schema.get("allowed_values", {}).items():
        if col not in df.columns:
            continue
        bad = df.loc[~df[col].isna() & ~df[col].isin(list(allowed)), col].unique()
        if len(bad) > 0:
            _fail(f"[{name}] '{col}' has invalid values: {bad[:10]}")
            ok = False

    return ok

def validate_ranges(name: str, df: pd.DataFrame) -> bool:
    schema = RESULT_SCHEMAS[name]
    ok = True

    for col, min_val in schema.get("min_values", {}).items():
        if col not in df.columns:
            continue
        values = pd.to_numeric(df[col], errors="coerce")
        bad = values[~values.isna() & (values < min_val)]
        if not bad.empty:
            _fail(f"[{name}] '{col}' has values < {min_val} (examples: {bad.head(5).tolist()})")
            ok = False

    for col, max_val in schema.get("max_values", {}).items():
        if col not in df.columns:
            continue
        values = pd.to_numeric(df[col], errors="coerce")
        bad = values[~values.isna() & (values > max_val)]
        if not bad.empty:
            _fail(f"[{name}] '{col}' has values > {max_val} (examples: {bad.head(5).tolist()})")
            ok = False

    return ok

def validate_monotone(name: str, df: pd.DataFrame) -> bool:
    schema = RESULT_SCHEMAS[name]
    ok = True

    for col, direction in schema.get("monotone", {}).items():
        if col not in df.columns or len(df) < 2:
            continue
        values = df[col].to_numpy(dtype=float)
        prev, nxt = values[:-1], values[1:]
        good = nxt > prev if direction == "increasing" else nxt <= prev
        if not good.all():
            at = int((~good).argmax()) + 1
            _fail(f"[{name}] '{col}' is not {direction} (first break at row {at})")
            ok = False

    return ok


# -------------------------
# RUN ALL
# -------------------------
def validate_table(name: str, df: pd.DataFrame) -> bool:
    if name not in RESULT_SCHEMAS:
        raise ValidationError(f"No result schema named '{name}'")
    ok = True
    ok &= validate_schema(name, df)
    ok &= validate_nulls(name, df)
    ok &= validate_dtypes(name, df)
    ok &= validate_allowed_values(name, df)
    ok &= validate_ranges(name, df)
    ok &= validate_monotone(name, df)
    if ok:
        _ok(f"{name}: {df.shape[0]} rows, {df.shape[1]} cols")
    return ok


def run_validation(tables: Dict[str, pd.DataFrame]) -> None:
    failed = [name for name, df in tables.items() if not validate_table(name, df)]

    if failed:
        raise ValidationError(f"Result validation failed for: {', '.join(failed)}")
