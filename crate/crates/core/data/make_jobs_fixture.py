"""Rebuild jobs_counts.csv from the public JOBS II extract.

The extract is the `jobs` data frame shipped with the R package `mediation`
(899 rows). The `rdatasets` package on PyPI bundles a copy:

    pip install rdatasets
    python make_jobs_fixture.py > jobs_counts.csv

Variable mapping:

    z = treat                      randomized to the workshops (1) or the booklet (0)
    a = comply                     attended at least one session
    m = job_dich                   job-search self-efficacy, dichotomized as shipped
                                   (1 = high); no threshold is applied here
    y = 1 if work1 == "psyemp"     employed at follow-up
"""

import sys

import rdatasets


def main() -> None:
    df = rdatasets.data("mediation", "jobs")
    df["y"] = (df["work1"] == "psyemp").astype(int)
    counts = df.groupby(["treat", "comply", "job_dich", "y"]).size().to_dict()
    out = sys.stdout
    out.write("z,a,m,y,count\n")
    for z in (0, 1):
        for a in (0, 1):
            for m in (0, 1):
                for y in (0, 1):
                    out.write(f"{z},{a},{m},{y},{counts.get((z, a, m, y), 0)}\n")


if __name__ == "__main__":
    main()
