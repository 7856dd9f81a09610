"""Run report serialization and human-readable summaries.

Reports are canonical JSON (sorted keys, fixed indentation, no NaN/Inf)
and contain no timestamps, so identical configurations produce
byte-identical files.  Scores are stored at full precision and rendered
in percent with two decimals.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import List, Sequence, Tuple


def canonical_json(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, indent=2,
                      allow_nan=False) + "\n"


def write_report(obj: dict, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(canonical_json(obj), encoding="utf-8")


def load_report(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _format_score(name: str, score: dict) -> str:
    line = f"{name.upper()}: {100.0 * score['value']:.2f}%"
    if score.get("stddev") is not None:
        line += f" (±{100.0 * score['stddev']:.2f} over {len(score['per_fold'])} folds)"
    elif score.get("per_fold") is not None and len(score["per_fold"]) > 1:
        line += f" ({len(score['per_fold'])} folds)"
    line += f" [n={score['n_comparisons']}]"
    return line


def human_summary(report: dict) -> str:
    lines = []
    config = report.get("config", {})
    lines.append(
        f"language={config.get('lang', '?')} method={config.get('method', '?')} "
        f"backend={config.get('backend', '?')} seed={config.get('seed', '?')}")
    for name in sorted(report.get("scores", {})):
        lines.append(_format_score(name, report["scores"][name]))
    dist = report.get("distribution")
    if dist:
        ratio = dist["ratio"]
        ratio_s = f"{ratio:.2f}:1" if isinstance(ratio, (int, float)) else f"{ratio}:1"
        lines.append(
            f"male/female: {dist['male_count']}/{dist['female_count']} "
            f"({dist['male_pct']:.2f}% / {dist['female_pct']:.2f}%, {ratio_s})")
    gen = report.get("generation")
    if gen:
        lines.append(
            f"generation[{gen['method']}]: input={gen['input_single_gender']} "
            f"retained={gen['retained']} "
            f"discarded={gen['discarded_for_balance']} ({gen['discard_pct']:.2f}%)")
    return "\n".join(lines)


def write_sweep_csv(rows: Sequence[Tuple[int, float]], path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["k,proportion"]
    lines += [f"{k},{proportion!r}" for k, proportion in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_word_type_csv(word_types: dict, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["origin,male,female"]
    for origin in sorted(word_types):
        counts = word_types[origin]
        lines.append(f"{origin},{counts['male']},{counts['female']}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_fold_csv(scores: dict, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["metric,fold,value"]
    for name in sorted(scores):
        per_fold: List[float] = scores[name].get("per_fold") or []
        for i, value in enumerate(per_fold):
            lines.append(f"{name},{i},{value!r}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
