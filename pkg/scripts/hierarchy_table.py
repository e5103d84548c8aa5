"""Print the hierarchy class of every one- and two-level query pattern."""

import argparse
import itertools

from semiring_gm.errors import QueryError
from semiring_gm.oracle import classify, parse_query

OPS = ["sum", "min", "max", "prod"]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--poly-outer", action="store_true", help="flag the outer level of two-level queries as polynomial")
    args = ap.parse_args()
    rows = []
    for marg, expand in itertools.product(OPS, OPS):
        rows.append(f"{marg}@all::{expand}")
    bang = "!" if args.poly_outer else ""
    for outer, inner, expand in itertools.product(OPS, OPS, OPS):
        if outer != inner:
            rows.append(f"{outer}{bang}@{{0}};{inner}@all::{expand}")
    print(f"{'query':<28} {'family':<7} {'class'}")
    for text in rows:
        try:
            c = classify(parse_query(text, 4))
            print(f"{text:<28} {c.family:<7} {c.complexity}")
        except QueryError as exc:
            print(f"{text:<28} {'-':<7} {type(exc).__name__}")


if __name__ == "__main__":
    main()
