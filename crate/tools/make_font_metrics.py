"""Writes the bundled font metric tables (Adobe core-font AFM advances)."""
import json
import pathlib

OUT = pathlib.Path(__file__).resolve().parent.parent / "crates/core/data/fonts"

HELVETICA = dict(zip(
    " !\"#$%&'()*+,-./0123456789:;<=>?@ABCDEFGHIJKLMNOPQRSTUVWXYZ[\\]^_`abcdefghijklmnopqrstuvwxyz{|}~",
    [278, 278, 355, 556, 556, 889, 667, 191, 333, 333, 389, 584, 278, 333, 278, 278]
    + [556] * 10
    + [278, 278, 584, 584, 584, 556, 1015]
    + [667, 667, 722, 722, 667, 611, 778, 722, 278, 500, 667, 556, 833, 722, 778,
       667, 778, 722, 667, 611, 722, 667, 944, 667, 667, 611]
    + [278, 278, 278, 469, 556, 333]
    + [556, 556, 500, 556, 556, 278, 556, 556, 222, 222, 500, 222, 833, 556, 556,
       556, 556, 333, 500, 278, 556, 500, 722, 500, 500, 500]
    + [334, 260, 334, 584],
))
HELVETICA.update({c: 556 for c in "àáâãäåèéêëñòóôõöùúûü"})
HELVETICA.update({c: 278 for c in "ìíîï"})
HELVETICA.update({"ç": 500, "ý": 500, "ÿ": 500, "ß": 611, "æ": 889, "ø": 611, "œ": 944})

COURIER = {c: 600 for c in HELVETICA}


def write(name, family, ascent, descent, gap, adv):
    table = {
        "name": name,
        "family": family,
        "units_per_em": 1000,
        "ascent": ascent,
        "descent": descent,
        "line_gap": gap,
        "advances": dict(sorted(adv.items())),
    }
    (OUT / f"{name}.json").write_text(json.dumps(table, ensure_ascii=False, indent=1) + "\n")


OUT.mkdir(parents=True, exist_ok=True)
write("helvetica", "Helvetica, Arial, sans-serif", 718, -207, 75, HELVETICA)
write("courier", "Courier New, Courier, monospace", 629, -157, 100, COURIER)
