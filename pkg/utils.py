import json

import numpy as np
import pandas as pd

from dgmod import DGModule, dg_to_dict, format_dg
from mf import EquivalenceCertificate, MatrixFactorization, format_mf, mf_to_dict
from polyring import RingMap, format_ring_map, ring_map_to_dict
from reduce import ReductionTrace, certificate_to_dict, format_certificate, format_trace, trace_to_dict
from scenario import Scenario, format_scenario, scenario_to_dict

RESULT_COLUMNS = ["criterion", "name", "checks", "passed", "seconds", "detail"]


def format_object(obj, fmt="text"):
    """
    Canonical text or JSON for any object the calculus reads or writes

    Args:
        obj: MatrixFactorization, DGModule, Scenario, RingMap, EquivalenceCertificate or ReductionTrace
        fmt (str): "text" or "json"

    Returns:
        str: Serialized object ending in a newline
    """
    writers = [
        (MatrixFactorization, format_mf, mf_to_dict),
        (DGModule, format_dg, dg_to_dict),
        (Scenario, format_scenario, scenario_to_dict),
        (RingMap, format_ring_map, ring_map_to_dict),
        (EquivalenceCertificate, format_certificate, certificate_to_dict),
        (ReductionTrace, format_trace, trace_to_dict),
    ]
    for kind, text_writer, dict_writer in writers:
        if isinstance(obj, kind):
            if fmt == "json":
                return json.dumps(dict_writer(obj), indent=2, sort_keys=True) + "\n"
            return text_writer(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def format_rank_table(objects, names=None):
    """
    Rank and grading overview of a list of factorizations

    Args:
        objects (list): MatrixFactorization objects
        names (list): Optional row labels

    Returns:
        pd.DataFrame: One row per object
    """
    rows = []
    for i, m in enumerate(objects):
        rows.append({
            "name": names[i] if names else f"object {i + 1}",
            "ring": str(m.ring),
            "rank_minus1": m.rank_minus1,
            "rank_zero": m.rank_zero,
            "graded": m.graded,
            "entries": len(m.total_differential().entries),
        })
    return pd.DataFrame(rows)


def certificate_summary(cert):
    """
    Sizes of the four matrices of a certificate and whether it verifies

    Args:
        cert (EquivalenceCertificate): Certificate to summarize

    Returns:
        dict: Summary fields
    """
    return {
        "source_rank": cert.source.total_rank,
        "target_rank": cert.target.total_rank,
        "forward_entries": len(cert.forward.block().entries),
        "backward_entries": len(cert.backward.block().entries),
        "homotopy_entries": len(cert.h_source.block().entries) + len(cert.h_target.block().entries),
        "verified": cert.verify().ok,
    }


def results_frame(rows):
    """
    Acceptance results as a DataFrame with a fixed column order

    Args:
        rows (list): Dicts with the keys of RESULT_COLUMNS

    Returns:
        pd.DataFrame: Results, one row per criterion
    """
    df = pd.DataFrame(rows, columns=RESULT_COLUMNS)
    if not df.empty:
        df["seconds"] = np.round(df["seconds"].astype(float), 2)
    return df


def export_to_csv(df, filename):
    """
    Export a results DataFrame to CSV

    Args:
        df (pd.DataFrame): Data to export
        filename (str): Output path

    Returns:
        str: The path written
    """
    df.to_csv(filename, index=False)
    return filename
