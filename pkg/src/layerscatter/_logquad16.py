"""Endpoint-correction table for the order-16 hybrid trapezoidal rule for
periodic integrands with a logarithmic singularity (Alpert-style hybrid
Gauss-trapezoidal construction).

The correction weights were solved in 100-digit arithmetic as the
minimum-norm solution of the Euler-Maclaurin moment conditions

    sum_m w_m chi_m^q          = -zeta(-q, OFFSET)      q = 0..15
    sum_m w_m chi_m^q log chi_m =  zeta'(-q, OFFSET)    q = 0..15

(zeta = Hurwitz zeta) on 96 Chebyshev nodes in (0, OFFSET - 1).  Using more
nodes than conditions keeps max|w| < 1 so the rule loses no digits to
cancellation in double precision.
"""

import numpy as np

# trapezoidal nodes within OFFSET grid spacings of the singularity are
# dropped and replaced by the correction sum
OFFSET = 10
ORDER = 16

CHI = np.array([
    0.00160231247592666776,
    0.00641984480482676367,
    0.0160497507283431565,
    0.030481718302010076,
    0.0497002934134678255,
    0.0736848963311153163,
    0.102409843741398243,
    0.135844376251149388,
    0.173952691325512908,
    0.216693981626197716,
    0.264022478708997882,
    0.315887502033787177,
    0.37223351323451308,
    0.4330001755910667,
    0.498122418639358625,
    0.56753050785039826,
    0.641150119303776104,
    0.718902419275576358,
    0.800704148655506981,
    0.88646771210283808,
    0.976101271845687112,
    1.06950884602320641,
    1.1665904114653615,
    1.26724201080024845,
    1.37135586377425226,
    1.47882048266584052,
    1.58952079166940919,
    1.70333825012133671,
    1.82015097943629561,
    1.9398338936178974,
    2.06225883320390459,
    2.18729470250259914,
    2.31480760997332778,
    2.44466101160092192,
    2.57671585711044526,
    2.71083073886571422,
    2.84686204329213062,
    2.98466410466170588,
    3.12408936107555747,
    3.26498851247689662,
    3.40721068052526371,
    3.55060357016083659,
    3.69501363268579147,
    3.84028623018809882,
    3.98626580113167444,
    4.13279602693555947,
    4.27971999936378214,
    4.42688038854662303,
    4.57411961145337641,
    4.72128000063621733,
    4.86820397306443997,
    5.014734198868325,
    5.16071376981190068,
    5.30598636731420803,
    5.45039642983916291,
    5.59378931947473579,
    5.73601148752310288,
    5.87691063892444278,
    6.01633589533829362,
    6.15413795670786788,
    6.29016926113428628,
    6.42428414288955324,
    6.55633898839907758,
    6.68619239002667247,
    6.81370529749740086,
    6.93874116679609541,
    7.0611661063821016,
    7.18084902056370389,
    7.29766174987866379,
    7.41147920833059031,
    7.52217951733415798,
    7.62964413622574724,
    7.73375798919975155,
    7.834409588534639,
    7.93149115397679309,
    8.02489872815431139,
    8.11453228789716142,
    8.20029585134449302,
    8.28209758072442314,
    8.3598498806962239,
    8.43346949214960074,
    8.50287758136064088,
    8.5679998244089323,
    8.62876648676548742,
    8.68511249796621232,
    8.73697752129100162,
    8.78430601837380228,
    8.82704730867448709,
    8.86515562374885111,
    8.89859015625860176,
    8.92731510366888468,
    8.95129970658653217,
    8.97051828169798992,
    8.98495024927165684,
    8.99458015519517324,
    8.99939768752407333,
])
WTS = np.array([
    0.00829307677688389458,
    -0.025572822765393272,
    0.148099345762199471,
    -0.367411083595531832,
    0.723520328180159486,
    -0.702761696402201649,
    0.216413360080381471,
    0.473180770128825246,
    -0.245730252830404666,
    -0.275953693532518775,
    0.264555307459472319,
    0.369532748924259049,
    -0.0204182491345860522,
    -0.245176666893629987,
    -0.0255817553159726572,
    0.288712622846916887,
    0.305043380793299169,
    0.0522021933631918995,
    -0.146338541083616806,
    -0.0796571105176419737,
    0.155778235559526507,
    0.309113212339013191,
    0.243762045222439581,
    0.0462540502808192345,
    -0.0871481334729905789,
    -0.0402482448521850438,
    0.134026712585424755,
    0.280558263724151304,
    0.282534166183446199,
    0.150972190096616283,
    0.00155647585524442733,
    -0.0461368839076766213,
    0.0401446914542721242,
    0.189755877507846608,
    0.290485714683953484,
    0.273196266901118016,
    0.157355036282975796,
    0.0303713295656332256,
    -0.017863733640119544,
    0.0436278961574814521,
    0.170073691352782507,
    0.275519964611289691,
    0.291697935631534461,
    0.211279913050635751,
    0.089315570905725433,
    0.00518121704265862904,
    0.0116048601359200915,
    0.103051200888392077,
    0.221474633773639278,
    0.293657955176475706,
    0.275961562412135607,
    0.179548634672480083,
    0.0622606628030184481,
    -0.00653731093960677424,
    0.0133508129885547957,
    0.110237647653988005,
    0.228018944613451955,
    0.298563887564213522,
    0.280168665672132307,
    0.18064837594620856,
    0.0528442305061082716,
    -0.0343225274116524717,
    -0.0331266906176325991,
    0.057370789792062241,
    0.190656790483435797,
    0.296871265282504427,
    0.318754297491180221,
    0.240846758394518505,
    0.0973436878326352794,
    -0.0448379718787873222,
    -0.118800298845109428,
    -0.0897836866273474103,
    0.0288398854761051327,
    0.182785291033258509,
    0.302945549276844625,
    0.337263859379329835,
    0.273254674380058932,
    0.141282435929845363,
    -0.0017223773600138261,
    -0.0993409190678401397,
    -0.120408862414403115,
    -0.0703679109837528249,
    0.014791957737345416,
    0.0877050513877064594,
    0.112029248445172107,
    0.0776796473835083157,
    0.00284622629131347615,
    -0.0765809886068328449,
    -0.123929434386787213,
    -0.116714338279394107,
    -0.0534657111464610379,
    0.0490759558318695622,
    0.165194190467967989,
    0.270310904915683609,
    0.347280272652869813,
    0.387303490527978699,
])
