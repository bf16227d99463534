"""Synthetic table with the stroke CSV schema.

Only for exercising the pipeline without the real file: marginals are
rough (age spread, ~4% missing BMI, a handful of BMI outliers, one
"Other" gender, ~5% positives concentrated in older, hypertensive,
high-glucose rows). Nothing measured on it says anything about stroke.
"""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .ingest import REQUIRED_COLUMNS


def make_stroke_like(n: int = 5110, seed: int = 0, positive_rate: float = 0.049) -> list[dict]:
    rng = np.random.default_rng(seed)
    age = np.where(rng.random(n) < 0.22, rng.uniform(0.08, 25, n), rng.uniform(25, 82, n)).round(2)
    age = np.where(age >= 2, age.round(0), age)
    gender = np.where(rng.random(n) < 0.59, "Female", "Male").astype(object)
    gender[rng.integers(n)] = "Other"
    old = np.clip((age - 25) / 57, 0, 1)
    hypertension = (rng.random(n) < 0.02 + 0.22 * old ** 1.5).astype(int)
    heart = (rng.random(n) < 0.01 + 0.12 * old ** 2).astype(int)
    married = np.where(rng.random(n) < np.clip(0.05 + 1.2 * (age - 18) / 40, 0.02, 0.9), "Yes", "No")
    work = rng.choice(["Private", "Self-employed", "Govt_job"], size=n, p=[0.64, 0.2, 0.16]).astype(object)
    work[(age >= 45) & (rng.random(n) < 0.12)] = "Self-employed"
    work[age < 16] = "children"
    work[(age >= 13) & (age < 23) & (rng.random(n) < 0.05)] = "Never_worked"
    residence = np.where(rng.random(n) < 0.51, "Urban", "Rural")
    diabetic = rng.random(n) < 0.05 + 0.25 * old
    glucose = np.where(diabetic, rng.normal(205, 32, n), rng.normal(92, 19, n)).clip(55, 272).round(2)
    bmi = (rng.normal(27 + 4 * np.minimum(age, 50) / 50, 6.5, n)).clip(10, 58).round(1)
    bmi[rng.choice(n, 12, replace=False)] = rng.uniform(61, 98, 12).round(1)
    smoking = np.where(age < 16, "Unknown",
                       rng.choice(["Unknown", "never smoked", "formerly smoked", "smokes"],
                                  size=n, p=[0.22, 0.42, 0.2, 0.16]))
    logit = (-8.9 + 5.2 * old ** 1.3 + 0.55 * hypertension + 0.5 * heart
             + 0.006 * (glucose - 100) + 0.25 * (smoking == "formerly smoked")
             + rng.normal(0, 0.45, n))
    logit[age < 25] -= 3
    p = 1 / (1 + np.exp(-logit))
    p *= positive_rate / p.mean()
    stroke = (rng.random(n) < np.clip(p, 0, 1)).astype(int)
    rows = []
    for i in range(n):
        b = "N/A" if rng.random() < 0.035 + 0.04 * stroke[i] else bmi[i]
        rows.append(dict(zip(REQUIRED_COLUMNS, (
            int(1000 + i), gender[i], float(age[i]), int(hypertension[i]), int(heart[i]),
            married[i], work[i], residence[i], float(glucose[i]), b, smoking[i], int(stroke[i]),
        ))))
    return rows


def write_stroke_like(path, n: int = 5110, seed: int = 0) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(REQUIRED_COLUMNS))
        w.writeheader()
        w.writerows(make_stroke_like(n, seed))
    return path
