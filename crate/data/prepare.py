#!/usr/bin/env python3
"""Rebuild the vendored CSV files under data/ from PyPI distributions that
bundle verbatim copies of the UCI files.

    pip download --no-deps responsibly==0.1.2 imbalanced-databases==0.1.1 \
        keel-ds==0.2.5 river==0.23.0 pydataset==0.2.0 -d /tmp/uci-src
    python3 data/prepare.py /tmp/uci-src

Only mechanical normalization happens here: a header row is added, fields are
trimmed, the trailing '.' on Adult test labels is removed, the Breast Cancer
"NA" marker becomes the UCI "?" marker. No rows are dropped or reordered; the
loader applies the experiment's preprocessing.
"""

import csv
import glob
import io
import os
import sys
import tarfile
import zipfile

HERE = os.path.dirname(os.path.abspath(__file__))


def member(src, pattern, name):
    path = glob.glob(os.path.join(src, pattern))[0]
    if path.endswith(".whl"):
        return zipfile.ZipFile(path).read(name)
    with tarfile.open(path) as tar:
        for m in tar.getmembers():
            if m.name.endswith(name):
                return tar.extractfile(m).read()
    raise KeyError(name)


def write(rel, header, rows):
    out = os.path.join(HERE, rel)
    os.makedirs(os.path.dirname(out), exist_ok=True)
    with open(out, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow(r)
    print(f"{rel}: {len(rows)} rows")


def adult(src):
    header = [
        "age", "workclass", "fnlwgt", "education", "education_num",
        "marital_status", "occupation", "relationship", "race", "sex",
        "capital_gain", "capital_loss", "hours_per_week", "native_country",
        "income",
    ]
    for name, rel in [("adult.data", "adult/adult.csv"), ("adult.test", "adult/adult_test.csv")]:
        raw = member(src, "responsibly-*.whl", f"responsibly/dataset/adult/{name}").decode()
        rows = []
        for line in raw.splitlines():
            if not line.strip() or line.startswith("|"):
                continue
            fields = [x.strip() for x in line.split(",")]
            fields[-1] = fields[-1].rstrip(".")
            rows.append(fields)
        write(rel, header, rows)


def german(src):
    header = [
        "checking_status", "duration", "credit_history", "purpose",
        "credit_amount", "savings", "employment", "installment_rate",
        "personal_status", "other_debtors", "residence_since", "property",
        "age", "other_installment_plans", "housing", "existing_credits",
        "job", "num_dependents", "telephone", "foreign_worker", "class",
    ]
    raw = member(src, "imbalanced_databases-*.whl",
                 "imbalanced_databases/data/german/german.data.txt").decode()
    rows = [line.split() for line in raw.splitlines() if line.strip()]
    write("german/german.csv", header, rows)


def australian(src):
    header = [f"A{i}" for i in range(1, 15)] + ["class"]
    raw = member(src, "keel_ds-*.whl", "keel_ds/data/balanced/raw/australian.dat").decode()
    rows = [[x.strip() for x in line.split(",")] for line in raw.splitlines()
            if line.strip() and not line.startswith("@")]
    write("australian/australian.csv", header, rows)


def spect(src):
    header = ["class"] + [f"F{i}" for i in range(1, 23)]
    for name, rel in [("SPECT.train.txt", "spect/spect_train.csv"), ("SPECT.test.txt", "spect/spect_test.csv")]:
        raw = member(src, "imbalanced_databases-*.whl",
                     f"imbalanced_databases/data/spect_f/{name}").decode()
        rows = [[x.strip() for x in line.split(",")] for line in raw.splitlines() if line.strip()]
        write(rel, header, rows)


def solar_flare(src):
    blob = member(src, "river-*.tar.gz", "river/datasets/solar-flare.csv.zip")
    z = zipfile.ZipFile(io.BytesIO(blob))
    raw = z.read(z.namelist()[0]).decode()
    lines = [line for line in raw.splitlines() if line.strip()]
    header = [h.strip().replace("-", "_") for h in lines[0].split(",")]
    rows = [[x.strip() for x in line.split(",")] for line in lines[1:]]
    write("solar_flare/flare_big.csv", header, rows)


def breast_cancer(src):
    header = [
        "id", "clump_thickness", "cell_size_uniformity", "cell_shape_uniformity",
        "marginal_adhesion", "epithelial_cell_size", "bare_nuclei",
        "bland_chromatin", "normal_nucleoli", "mitoses", "class",
    ]
    tar = glob.glob(os.path.join(src, "pydataset-*.tar.gz"))[0]
    with tarfile.open(tar) as outer:
        inner = outer.extractfile(next(m for m in outer.getmembers() if m.name.endswith("resources.tar.gz")))
        with tarfile.open(fileobj=io.BytesIO(inner.read())) as res:
            m = next(m for m in res.getmembers() if m.name.endswith("csv/MASS/biopsy.csv"))
            raw = res.extractfile(m).read().decode()
    reader = csv.reader(io.StringIO(raw))
    next(reader)
    rows = [["?" if x == "NA" else x for x in r[1:]] for r in reader]
    write("breast_cancer_wisconsin/bcw.csv", header, rows)


def main():
    src = sys.argv[1] if len(sys.argv) > 1 else "/tmp/uci-src"
    adult(src)
    german(src)
    australian(src)
    spect(src)
    solar_flare(src)
    breast_cancer(src)


if __name__ == "__main__":
    main()
