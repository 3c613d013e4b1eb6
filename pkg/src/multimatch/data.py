"""Published reference data for the US couples application.

Contingency tables are transcribed cell by cell as printed (rows are the
health index 1..5, columns the education or health index 1..5). A handful of
printed cells are evidently mistyped; :data:`TABLE_CORRECTIONS` lists the
repaired values and :func:`joint_table` applies them unless asked not to.
"""

from __future__ import annotations

import numpy as np

#: the two variables each published table cross-tabulates, as (rows, columns)
TABLE_AXES = {
    "WW_HE": (("W", "H"), ("W", "E")),
    "MM_HE": (("M", "H"), ("M", "E")),
    "WM_HE": (("W", "H"), ("M", "E")),
    "MW_HE": (("M", "H"), ("W", "E")),
    "WM_HH": (("W", "H"), ("M", "H")),
}

YEARS = tuple(range(2010, 2018))

_PRINTED = {
    "WW_HE": {
        2010: """
             .0082  .0136   .008  .0026  .0015
             .0178  .0374  .0237  .0094  .0042
             .0336  .1035  .0772  .0423  .0216
             .0227  .0968  .0964  .0754  .0411
             .0115  .0541  .0747  .0788  .0442
        """,
        2011: """
             .0073   .015   .009  .0036  .0015
             .0165  .0364  .0241  .0109  .0049
             .0333  .0971  .0745  .0432  .0224
             .0214  .0975  .1017  .0781  .0422
             .0123  .0538  .0701  .0774  .0458
        """,
        2012: """
             .0074  .0154  .0083  .0037  .0015
             .0161  .0386  .0252  .0098  .0047
             .0342  .0947  .0754  .0419  .0215
             .0214  .0945  .0987  .0806  .0434
             .0099  .0530  .0702  .0827  .0471
        """,
        2013: """
              .007  .0138  .0085  .0031  .0014
             .0171  .0368  .0254  .0106  .0055
             .0309  .0937  .0757  .0432  .0229
             .0189  .0921  .0987  .0827  .0477
             .0114  .0538  .0708  .0791  .0492
        """,
        2014: """
             .0079  .0144  .0082  .0031  .0018
             .0167  .0374  .0256  .0118  .0064
             .0275  .0933  .0764  .0445   .024
             .0185  .0899  .0984  .0836  .0492
             .0121  .0471  .0709  .0805  .0509
        """,
        2015: """
              .006  .0133  .0094  .0036   .002
             .0151  .0336  .0247  .0122  .0053
             .0296  .0915  .0758  .0459  .0255
             .0212  .0914  .0946  .0835  .0485
             .0125  .0519   .068  .0816  .0531
        """,
        2016: """
             .0061  .0118  .0078  .0031  .0021
             .0139  .0347  .0241   .013  .0067
             .0271  .0894  .0792  .0488  .0291
             .0204  .0855  .0970  .0871  .0517
             .0122    .05  .0682  .0806  .0503
        """,
        2017: """
             .0062  .0121  .0082  .0029  .0024
             .0133  .0325  .0258  .0122  .0051
             .0275  .0868  .0809  .0514  .0283
             .0172  .0844  .0968  .0914   .053
             .0116  .0501  .0661  .0811  .0526
        """,
    },
    "MM_HE": {
        2010: """
             .0127  .0146  .0084  .0046  .0021
             .0191  .0376  .0223  .0113  .0064
               .04  .0967   .069  .0441  .0256
              .026  .0981  .0862  .0734  .0431
             .0158   .061  .0637  .0693   .049
        """,
        2011: """
             .0108   .015  .0098  .0041  .0027
             .0185  .0347  .0227  .0125  .0069
             .0386  .0942   .067  .0417  .0237
             .0262  .0997  .0901  .0742  .0468
             .0153   .058  .0621  .0707  .0503
        """,
        2012: """
             .0108  .0168  .0081   .004  .0032
             .0203  .0367  .0225  .0108  .0069
             .0386  .0875   .068  .0434  .0275
             .0256  .0955  .0878  .0776  .0484
             .0148  .0568  .0644   .074  .0502
        """,
        2013: """
             .0115  .0145  .0089  .0029  .0019
             .0188  .0344  .0232  .0118  .0077
             .0342  .0935   .068  .0446  .0288
             .0246  .0932  .0907  .0811  .0484
             .0143   .056  .0629  .0718  .0524
        """,
        2014: """
             .0101  .0156  .0077  .0038  .0019
             .0191  .0354  .0244  .0114  .0079
             .0337  .0912  .0707  .0468  .0301
             .0235  .0921  .0912  .0783  .0484
              .015  .0588  .0613  .0701  .0514
        """,
        2015: """
             .0088  .0135  .0093   .004  .0018
             .0172  .0343  .0242  .0126   .008
             .0337  .0914  .0702  .0462  .0293
             .0257  .0914  .0879  .0777  .0507
             .0159  .0577  .0615  .0752  .0517
        """,
        2016: """
             .0087  .0132  .0081  .0038  .0029
              .015   .032  .0241  .0124  .0078
             .0336   .089  .0756  .0511  .0304
             .0248  .0894  .0869  .0818  .0528
             .0159  .0561  .0619  .0716  .0511
        """,
        2017: """
             .0081  .0122  .0082  .0031  .0023
             .0152  .0344  .0244  .0141  .0079
             .0336  .0916  .0735  .0504  .0315
             .0221  .0859  .0887   .085  .0537
             .0126  .0555  .0596   .075  .0511
        """,
    },
    "WM_HE": {
        2010: """
             .0095  .0125  .0071  .0031  .0017
             .0196  .0346  .0211  .0106  .0064
             .0415  .0993  .0692  .0435  .0246
             .0286  .0996  .0861  .0737  .0444
             .0146   .062  .0661  .0717   .049
        """,
        2011: """
             .0078  .0133  .0085  .0045  .0023
             .0188  .0349  .0215  .0109  .0068
             .0399  .0929  .0664  .0429  .0284
             .0283  .1014  .0909  .0743  .0461
             .0147  .0591  .0644  .0707  .0505
        """,
        2012: """
             .0089  .0137  .0073  .0037  .0029
             .0195  .0352  .0216  .0114  .0066
             .0395  .0908  .0677  .0418  .0278
             .0279  .0973  .0891  .0772   .047
             .0143  .0564   .065  .0754  .0519
        """,
        2013: """
             .0081  .0124  .0072  .0036  .0024
             .0199  .0332  .0229  .0113  .0081
             .0363  .0922  .0666  .0428  .0284
             .0248  .0948  .0903  .0816  .0487
             .0142   .059  .0667  .0729  .0515
        """,
        2014: """
             .0084  .0133  .0075  .0038  .0025
             .0196   .035  .0244  .0108  .0081
             .0338  .0908  .0677  .0453   .028
             .0255  .0947  .0911  .0782  .0501
              .014  .0594  .0646  .0724  .0511
        """,
        2015: """
             .0068  .0129  .0084  .0037  .0024
              .017  .0308  .0234  .0125  .0073
             .0352    .09  .0685  .0453  .0294
              .026  .0955  .0891   .079  .0496
             .0163   .059  .0637  .0752  .0528
        """,
        2016: """
             .0066  .0114  .0074  .0031  .0023
              .016  .0326   .023  .0125  .0083
             .0338  .0873  .0744   .048  .0301
             .0252  .0928  .0892  .0827  .0519
             .0164  .0557  .0625  .0744  .0524
        """,
        2017: """
             .0061  .0126  .0074  .0034  .0022
             .0155  .0321  .0219  .0121  .0072
             .0322  .0899  .0722  .0497  .0313
             .0231  .0886  .0926  .0856  .0528
             .0146  .0564  .0606  .0769   .053
        """,
    },
    "MW_HE": {
        2010: """
             .0089  .0172  .0101   .004  .0021
             .0174  .0386   .023  .0113  .0063
             .0325  .0983  .0783  .0438  .0226
             .0225  .0954  .0945  .0743  .0401
             .0124  .0558   .074   .075  .0415
        """,
        2011: """
             .0086  .0172  .0099  .0042  .0025
             .0158  .0357  .0251  .0128   .006
             .0316  .0958  .0748  .0446  .0221
             .0218  .0966   .099  .0772  .0424
             .0132  .0547  .0705  .0744  .0437
        """,
        2012: """
              .008  .0181  .0104  .0036  .0027
             .0157  .0382  .0253  .0121  .0058
              .031  .0933  .0731  .0443  .0231
             .0223  .0912  .0996  .0797  .0421
             .0118  .0554  .0693  .0792  .0445
        """,
        2013: """
             .0078  .0163  .0099  .0035  .0021
             .0151  .0362  .0257  .0123  .0067
             .0305  .0931  .0751   .045  .0253
               .02  .0911  .1001  .0811  .0458
              .012  .0536  .0683  .0767  .0468
        """,
        2014: """
             .0078  .0154  .0096  .0039  .0026
             .0148  .0392  .0244  .0126  .0072
             .0281  .0925  .0778  .0478  .0264
              .019   .086  .0979  .0826  .0479
              .013   .049  .0698  .0766  .0482
        """,
        2015: """
             .0068  00151  .0091   .004  .0025
             .0144  .0035  .0275  .0132  .0062
              .029  .0905  .0756  .0478  .0279
             .0218  .0886  .0914  .0829  .0477
             .0124  .0526  .0679  .0791  .0501
        """,
        2016: """
             .0061  .0129  .0103  .0047  .0026
             .0121  .0352  .0247  .0135  .0085
             .0284  .0885    .08  .0515  .0314
             .0207  .0856  .0938   .086  .0496
             .0123   .052  .0675   .077  .0477
        """,
        2017: """
             .0055  .0133   .009  .0039  .0021
             .0126  .0348  .0271  .0135  .0078
             .0283  .0872  .0816  .0539  .0299
             .0178  .0816  .0958  .0881  .0522
             .0115  .0489  .0642  .0798  .0493
        """,
    },
    "WM_HH": {
        2010: """
             .0135  .0074  .0069  .0038  .0024
             .0096   .041  .0242  .0111  .0064
             .0116  .0287  .1863  .0338  .0177
             .0049  .0125  .0402  .2493  .0254
             .0027  .0071  .0179  .0287  .2068
        """,
        2011: """
             .0129  .0072  .0083  .0053  .0027
             .0105  .0415  .0217  .0119  .0072
             .0111  .0277  .1794  .0343  .0179
             .0051   .012  .0406  .2584  .0248
             .0027  .0069  .0189  .0271  .2038
        """,
        2012: """
              .013  .0065  .0084  .0053  .0032
               .01  .0417  .0227  .0121  .0078
             .0114  .0285  .1724  .0357  .0196
             .0055  .0136  .0424   .252  .0251
             .0031  .0068  .0189  .0297  .2046
        """,
        2013: """
             .0116  .0064   .008  .0051  .0027
             .0097  .0417  .0249  .0123  .0068
             .0111  .0272  .1747  .0367  .0167
             .0045  .0131  .0415  .2547  .0263
             .0027  .0075    .02  .0293  .2047
        """,
        2014: """
             .0114  .0082  .0084  .0043  .0032
             .0098  .0443  .0245  .0126  .0066
             .0089  .0269  .1772  .0335   .019
              .006  .0122  .0418  .2523  .0272
              .003  .0066  .0206  .0307  .2006
        """,
        2015: """
             .0113  .0073  .0083  .0044   .003
             .0091  .0405  .0228  .0119  .0067
             .0093  .0279  .1805  .0326   .018
             .0051  .0136  .0407  .2542  .0257
             .0027   .007  .0185  .0303  .2087
        """,
        2016: """
              .011  .0054  .0072  .0046  .0027
             .0083  .0421   .024  .0112  .0068
             .0102   .023  .1868  .0343  .0194
              .005  .0129   .042  .2567  .0252
             .0022   .008  .0197  .0289  .2024
        """,
        2017: """
             .0106  .0067  .0072  .0045  .0027
             .0074  .0426  .0021  .0105  .0063
             .0085  .0267   .188  .0359   .016
             .0051  .0126  .0421  .2576  .0253
             .0022  .0073  .0215   .027  .2035
        """,
    },
}

#: (table, year, row, col) -> corrected value, 1-based row/col.
#: Each repair brings the table total back to one, up to printing rounding.
TABLE_CORRECTIONS = {
    ("MW_HE", 2015, 1, 2): 0.0151,  # printed "00151"
    ("MW_HE", 2015, 2, 2): 0.0350,  # printed ".0035"
    ("WM_HH", 2017, 2, 3): 0.0221,  # printed ".0021"
}

#: Reported gamma statistics by year, keyed by the statistic name used in
#: :mod:`multimatch.association`.
REPORTED_GAMMAS = {
    "WW_HE": dict(zip(YEARS, (.3121, .2934, .3176, .301, .3044, .2807, .2614, .2707))),
    "MM_HE": dict(zip(YEARS, (.2708, .263, .2748, .2741, .2563, .2475, .2297, .2486))),
    "WM_HE": dict(zip(YEARS, (.2756, .2565, .2753, .2602, .255, .238, .2331, .244))),
    "MW_HE": dict(zip(YEARS, (.2771, .2669, .2791, .273, .2731, .2597, .2239, .2522))),
    "WM_HH": dict(zip(YEARS, (.7586, .7469, .7328, .7423, .7384, .7486, .7396, .7498))),
}


#: estimated complementarities, rows = woman attribute, cols = man attribute
THETA_HE = {("H", "H"): .7625, ("H", "E"): -.0375, ("E", "H"): -.0226, ("E", "E"): .5572}

#: empirical and predicted pooled association levels
POOLED_GAMMAS_EMPIRICAL = {"WM_HH": .7439, "WM_HE": .2546, "WM_EH": .2638, "WM_EE": .6468}
POOLED_GAMMAS_PREDICTED = {"WM_HH": .6545, "WM_HE": .2017, "WM_EH": .2218, "WM_EE": .6041}

#: fit summary: KL divergence and entropy in bits, efficiency loss in percent
FIT_SUMMARY = {"kl": .3952, "entropy": 7.837, "efficiency_loss": 4.8}


def _parse(block: str) -> np.ndarray:
    return np.array([[float(v) for v in line.split()] for line in block.strip().splitlines()])


def joint_table(table: int, year: int, corrected: bool = True) -> np.ndarray:
    """5x5 joint distribution of a published table for one survey year."""
    try:
        block = _PRINTED[table][year]
    except KeyError:
        raise KeyError(f"no published table {table!r} for year {year}") from None
    arr = _parse(block)
    if corrected:
        for (t, y, r, c), v in TABLE_CORRECTIONS.items():
            if (t, y) == (table, year):
                arr[r - 1, c - 1] = v
    return arr


def pooled_table(table: int, corrected: bool = True) -> np.ndarray:
    """Average of the yearly tables, renormalized to total one."""
    arr = sum(joint_table(table, y, corrected) for y in YEARS)
    return arr / arr.sum()
