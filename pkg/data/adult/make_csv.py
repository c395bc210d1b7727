"""Build adult.csv (header row, both UCI splits) from the raw UCI files.

Usage: python make_csv.py adult.data adult.test > adult.csv

The raw files are headerless, use ", " separators, and the test split has a
banner line and a trailing '.' on the income label.
"""

import csv
import sys

COLUMNS = [
    "age", "workclass", "fnlwgt", "education", "education_num",
    "marital_status", "occupation", "relationship", "race", "sex",
    "capital_gain", "capital_loss", "hours_per_week", "native_country",
    "income",
]


def rows(path):
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("|"):
                continue
            fields = [v.strip() for v in line.split(",")]
            fields[-1] = fields[-1].rstrip(".")
            yield fields


def main(paths):
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow(COLUMNS)
    for path in paths:
        out.writerows(rows(path))


if __name__ == "__main__":
    main(sys.argv[1:])
