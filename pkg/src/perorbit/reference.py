"""Reference frequency-response data of the hardening Duffing oscillator.

Points ``(Omega, max q)`` for ``q'' + c q' + q + q^3 = f cos(Omega t)`` at
three forcing levels, split into stable and unstable segments. The tables
are consistent with ``c = 0.02`` (the fold locations fix the damping);
``REFERENCE_DAMPING`` records that value.
"""

import math

nan = math.nan

REFERENCE_DAMPING = 0.02

DUFFING_FRF = {
    1.0: {
        "unstable": [
            (0.690523210767485, 0.952337939006846),
            (nan, nan),
            (0.698182301926214, 0.954888303880584),
            (0.740720652509768, 0.971631990923166),
            (nan, nan),
            (6.63849714585131, 7.74223765222456),
            (6.62171798158195, 7.72090024280358),
            (6.44651182537539, 7.50828464308119),
            (4.91577896128427, 5.65561585331117),
            (4.33599414591443, 4.94578887901755),
            (3.87510390090033, 4.37509096413009),
            (3.50113111194255, 3.90554318332616),
            (3.19265400004492, 3.51168732418044),
            (2.93728247058347, 3.17907828191385),
            (2.71964864498644, 2.88884989514934),
            (2.53833310087801, 2.64026105818872),
            (2.38436606447296, 2.42229227951784),
            (2.25128045651764, 2.22669040588663),
            (2.13655502675336, 2.05049543262114),
            (2.04267066338799, 1.89884240143981),
            (1.95963459076642, 1.75663278873508),
            (1.88865386402217, 1.62624563596382),
            (1.83059907182369, 1.51048751121727),
            (1.78576928475954, 1.41247561578501),
            (1.7485929154143, 1.32222352681433),
            (1.71907302344068, 1.24113457460605),
            (1.69272060269566, 1.1562438759459),
            (1.67415087393098, 1.08233914883762),
            (1.6622832616539, 1.02099954219322),
            (1.65386733625921, 0.957589620998712),
            (1.64986912998379, 0.892037560921658),
            (1.64969964761111, 0.875978383463963),
        ],
        "stable": [
            (0.6, 0.9384967793951),
            (0.618338628224642, 0.938104950308617),
            (0.648793905798994, 0.941590613821834),
            (0.681348297080721, 0.94949717529313),
            (nan, nan),
            (0.690523210767484, 0.952337939006846),
            (nan, nan),
            (0.740720652509767, 0.971631990923166),
            (0.784735397167932, 0.992788129895645),
            (0.836430015672978, 1.02166816622835),
            (0.903081285457935, 1.06429766501611),
            (0.966336533788471, 1.10960831859865),
            (1.0404471944595, 1.16795720933822),
            (1.12272640496747, 1.23856764031928),
            (1.21096166306183, 1.32017669812361),
            (1.31459594917042, 1.42249797672993),
            (1.42973088024528, 1.54271419364308),
            (1.56258598538301, 1.68788906850593),
            (1.72506712218724, 1.87204566881591),
            (1.93824470663112, 2.1206274135131),
            (2.24332234561217, 2.48367344652836),
            (2.82191517709147, 3.18020841398973),
            (4.09040582555806, 4.70711218860191),
            (5.1301513553287, 5.95135853456293),
            (6.20470206456904, 7.23075673888764),
            (6.63839898395265, 7.74221443674985),
            (6.63849719810129, 7.74223885939222),
            (nan, nan),
            (1.64969964761786, 0.875978168682112),
            (1.65155148549245, 0.82430636665417),
            (1.65752493035228, 0.772085782515534),
            (1.66852177696571, 0.718685351474399),
            (1.68567340824022, 0.664176145770224),
            (1.70122143200804, 0.627270357931334),
            (1.72065870423761, 0.589962383306069),
            (1.74461095101345, 0.552308634863023),
            (1.77383418367524, 0.514378603671281),
            (1.80925287407706, 0.476256600581582),
            (1.85201297566793, 0.438043809801835),
            (1.90355649004551, 0.399860855267345),
            (1.96572746263299, 0.361851205319965),
            (2.04092385223854, 0.324185924125231),
            (2.1323157324608, 0.287070543246399),
            (2.24415638575965, 0.250755191413058),
            (2.30947358146801, 0.232991434450959),
            (2.38221244762552, 0.215549828627013),
            (2.46342030073956, 0.198481934977741),
            (2.55430938007594, 0.181845555353805),
            (2.65626865728771, 0.165706640537511),
            (2.77086264462912, 0.150139592524356),
            (2.89980578779873, 0.13522752505212),
            (3.04489677404538, 0.121061442991419),
            (3.20789563100687, 0.107737495024908),
            (3.39033368691904, 0.0953513278079097),
            (3.59326939279762, 0.0839889438486576),
            (4.06111087945702, 0.0645594290095293),
            (4.60381920839382, 0.0495209381140764),
            (5.20392010977797, 0.0383437002364495),
            (5.8426944211996, 0.0301780645002339),
            (6.84339492707523, 0.021818841981327),
            (8.21746165455097, 0.0150315492033481),
        ],
    },
    0.1: {
        "unstable": [
            (2.21142996842709, 2.31700508517089),
            (2.19526116357129, 2.29320902127495),
            (1.77806966705553, 1.70279478893068),
            (1.65768537817321, 1.5207165061733),
            (1.56130738425346, 1.36771287090931),
            (1.47735651684721, 1.22682619365168),
            (1.40778852042788, 1.10216064136085),
            (1.34632324943426, 0.982966017255282),
            (1.30144016298455, 0.887650452163636),
            (1.25886747834914, 0.786685570868225),
            (1.22649530277958, 0.697889961985493),
            (1.20382182958141, 0.623657468396525),
            (1.18541656485231, 0.546538668215415),
            (1.17557605016229, 0.486830334584341),
            (1.17049544254077, 0.425621207293168),
            (1.1701620353421, 0.406571951072478),
        ],
        "stable": [
            (0.6, 0.152489831626079),
            (0.647927694479614, 0.166772142044398),
            (0.693806195445763, 0.184229573757699),
            (0.740193715011914, 0.207012313358405),
            (0.779522382263467, 0.231763717754115),
            (0.816763635792036, 0.261166403525133),
            (0.854319984397806, 0.298017514752178),
            (0.887033862897949, 0.336768317016729),
            (0.92924460291885, 0.395938504698883),
            (0.97780431414156, 0.474480688527281),
            (1.05295566104985, 0.607403139046054),
            (1.1808213269673, 0.834298678908333),
            (1.27425135453525, 0.991534528291627),
            (1.37283779904428, 1.14950632779183),
            (1.48377801391561, 1.31941373951405),
            (1.61241883236415, 1.50838326562746),
            (1.75482412288165, 1.70997799638529),
            (1.92679021768477, 1.94546170057186),
            (2.10409014191759, 2.18085570163233),
            (2.21027850107486, 2.31642148425437),
            (2.21154382561617, 2.31737642925583),
            (nan, nan),
            (1.17016470713563, 0.404895993506809),
            (1.17210312987449, 0.363035218065562),
            (1.17839181945543, 0.320672975452563),
            (1.19055815115329, 0.277952942361956),
            (1.1995508580297, 0.256516682831522),
            (1.21102492590957, 0.235079104065887),
            (1.22554433315896, 0.213696287345121),
            (1.24385621361276, 0.192438770776089),
            (1.26695770479943, 0.171411668114688),
            (1.29617979032515, 0.1507654949572),
            (1.33327751121934, 0.130707451850315),
            (1.38049331847831, 0.111521468800611),
            (1.43085864742045, 0.0960899707665615),
            (1.48443141925101, 0.0834319562293668),
            (1.54293180043084, 0.0726247423111079),
            (1.60836492780066, 0.0631271171774639),
            (1.68303919272256, 0.0546256134587519),
            (1.87082038248595, 0.0400157335508489),
            (2.12546445211435, 0.0284314087162851),
            (2.44979049735887, 0.019994226244556),
            (2.8394349729313, 0.0141593122425245),
            (3.60663937152344, 0.00832777234897009),
            (4.93476335413663, 0.00428227050993613),
            (7.72173868977041, 0.00170573766097704),
            (8.07345351071217, 0.00155809092880332),
        ],
    },
    0.01: {
        "unstable": [
            (1.078341813099, 0.465211614978717),
            (1.07492200563165, 0.446616666096186),
            (1.0508527097915, 0.332397817552563),
            (1.04158988868221, 0.268431730659876),
            (1.0374626798853, 0.215101890070264),
            (1.03703758379492, 0.193877711726034),
        ],
        "stable": [
            (0.6, 0.0156173964103936),
            (0.730362758194566, 0.0214073394564123),
            (0.795285615885699, 0.0271435850806752),
            (0.832016173290073, 0.0323608462728791),
            (0.871622564702805, 0.0412910020404631),
            (0.909048316978487, 0.0565129091104071),
            (0.931006895178305, 0.0722665515287146),
            (0.947745972743621, 0.0911964076306551),
            (0.958614706389395, 0.108794671943433),
            (0.970044311313822, 0.133526936765882),
            (0.987487233956283, 0.184749592063437),
            (1.05852065537995, 0.419928419161574),
            (1.07719426347043, 0.465769906459806),
            (1.07834181310019, 0.465211738277308),
            (nan, nan),
            (1.03703758157269, 0.193861317081506),
            (1.0383743282292, 0.1597611878239),
            (1.04369877369177, 0.124283061700385),
            (1.05376594706206, 0.0944801647316029),
            (1.06654255201032, 0.0740206136599757),
            (1.07999891887576, 0.0605848363745674),
            (1.09463655624476, 0.0506293983138852),
            (1.11199479099772, 0.0423217415039838),
            (1.13468496713133, 0.0347782085690187),
            (1.16808935675762, 0.0274263297138679),
            (1.22617206088552, 0.0198485686074799),
            (1.27623059663951, 0.0158937329391242),
            (1.35699051589863, 0.0118762184436263),
            (1.58555501388757, 0.00660264359273821),
            (2.07713987571579, 0.00301665040320787),
            (3, 0.00124994850400695),
        ],
    },
}


def segments(f: float, kind: str):
    """Split a table at its ``nan`` separators into polylines."""
    segs, cur = [], []
    for p in DUFFING_FRF[f][kind]:
        if math.isnan(p[0]):
            if cur:
                segs.append(cur)
            cur = []
        else:
            cur.append(p)
    if cur:
        segs.append(cur)
    return segs


def anchors(f: float):
    """All finite ``(Omega, amplitude, stable)`` triples for forcing level ``f``."""
    out = []
    for kind in ("stable", "unstable"):
        for seg in segments(f, kind):
            out += [(w, a, kind == "stable") for w, a in seg]
    return out
