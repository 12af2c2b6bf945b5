"""Render figures for a CLI output directory.

    rgbsde solve --problem docs/examples/american_put.toml --out runs/put
    python docs/examples/plot_run.py runs/put
"""

import argparse

from rgbsde.plotting import plot_run


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("run_dir")
    p.add_argument("--fig-dir", help="where to write PNGs (default: the run directory)")
    args = p.parse_args()
    for path in plot_run(args.run_dir, args.fig_dir):
        print(path)


if __name__ == "__main__":
    main()
