#!/usr/bin/env python3
"""Regenerates data/resources/lexicon.tsv from the word lists below.

Stems come from the reference Snowball English stemmer (pip install
snowballstemmer), so the lexicon doubles as a stemmer fixture.
"""
import sys

import snowballstemmer

NOUNS = """
access actuator adapter aileron air aircraft airframe airspeed alternator altimeter
antenna annunciator arm assembly axle baffle bearing belt bladder blade bolt boot
brace bracket brake breaker bulb bushing cable cam cap carburetor case casting
chafe channel circuit clamp clevis clip coil collar compass compressor connector
console contact control cooler cover cowl cowling crankcase crankshaft crack cylinder
damage damper defect deflector diaphragm door drain duct elevator engine exhaust
fabric fairing fan fastener filter fitting flange flap float flow fluid frame fuel
fuse fuselage gasket gauge gear generator governor grommet ground gyro handle harness
hinge horn hose hub indicator inlet inspection instrument intake jack joint key
knob lamp landing latch lead leak lens lever light line link linkage lock locknut
magneto manifold mount muffler nacelle needle nipple nose nozzle nut oil
orifice outlet panel patch pedal pin piston pitot plate plug pressure primer probe
propeller pulley pump push radio rail regulator relay reservoir rib ring rivet rocker
rod rotor rudder rust screw seal seat sensor servo shaft shield shim shock shroud
skin sleeve spacer spar spark spinner spring starter strap strut stud support
switch tab tachometer tank terminal throttle tire tube turnbuckle valve vent
washer weld wheel window windshield wing wire wiring yoke material cessna battery
tolerance pilot mechanic logbook station ramp hangar flight stall oxygen static
safety cotter torque vibration noise corrosion residue leakage pressure temperature
voltage amperage hole surface edge stop tip root trim trailing leading surface
mixture heater defroster harness placard decal seatbelt headset microphone speaker
transponder beacon strobe navigation""".split()

# (base, third-person, past, gerund)
VERBS = [
    ("install", "installs", "installed", "installing"),
    ("remove", "removes", "removed", "removing"),
    ("replace", "replaces", "replaced", "replacing"),
    ("repair", "repairs", "repaired", "repairing"),
    ("inspect", "inspects", "inspected", "inspecting"),
    ("check", "checks", "checked", "checking"),
    ("secure", "secures", "secured", "securing"),
    ("resecure", "resecures", "resecured", "resecuring"),
    ("tighten", "tightens", "tightened", "tightening"),
    ("loosen", "loosens", "loosened", "loosening"),
    ("adjust", "adjusts", "adjusted", "adjusting"),
    ("clean", "cleans", "cleaned", "cleaning"),
    ("lubricate", "lubricates", "lubricated", "lubricating"),
    ("service", "services", "serviced", "servicing"),
    ("fabricate", "fabricates", "fabricated", "fabricating"),
    ("rivet", "rivets", "riveted", "riveting"),
    ("weld", "welds", "welded", "welding"),
    ("drill", "drills", "drilled", "drilling"),
    ("leak", "leaks", "leaked", "leaking"),
    ("crack", "cracks", "cracked", "cracking"),
    ("need", "needs", "needed", "needing"),
    ("test", "tests", "tested", "testing"),
    ("operate", "operates", "operated", "operating"),
    ("torque", "torques", "torqued", "torquing"),
    ("safety", "safeties", "safetied", "safetying"),
    ("chafe", "chafes", "chafed", "chafing"),
    ("wear", "wears", "worn", "wearing"),
    ("break", "breaks", "broken", "breaking"),
    ("bend", "bends", "bent", "bending"),
    ("align", "aligns", "aligned", "aligning"),
    ("balance", "balances", "balanced", "balancing"),
    ("calibrate", "calibrates", "calibrated", "calibrating"),
    ("drain", "drains", "drained", "draining"),
    ("fill", "fills", "filled", "filling"),
    ("flush", "flushes", "flushed", "flushing"),
    ("overhaul", "overhauls", "overhauled", "overhauling"),
    ("patch", "patches", "patched", "patching"),
    ("paint", "paints", "painted", "painting"),
    ("polish", "polishes", "polished", "polishing"),
    ("reattach", "reattaches", "reattached", "reattaching"),
    ("reinstall", "reinstalls", "reinstalled", "reinstalling"),
    ("reseal", "reseals", "resealed", "resealing"),
    ("rotate", "rotates", "rotated", "rotating"),
    ("seal", "seals", "sealed", "sealing"),
    ("secure", "secures", "secured", "securing"),
    ("splice", "splices", "spliced", "splicing"),
    ("start", "starts", "started", "starting"),
    ("stop", "stops", "stopped", "stopping"),
    ("support", "supports", "supported", "supporting"),
    ("trim", "trims", "trimmed", "trimming"),
    ("troubleshoot", "troubleshoots", "troubleshot", "troubleshooting"),
    ("verify", "verifies", "verified", "verifying"),
    ("vibrate", "vibrates", "vibrated", "vibrating"),
    ("wire", "wires", "wired", "wiring"),
    ("ground", "grounds", "grounded", "grounding"),
    ("push", "pushes", "pushed", "pushing"),
    ("miss", "misses", "missed", "missing"),
    ("fail", "fails", "failed", "failing"),
    ("stick", "sticks", "stuck", "sticking"),
    ("sand", "sands", "sanded", "sanding"),
    ("shim", "shims", "shimmed", "shimming"),
    ("clamp", "clamps", "clamped", "clamping"),
    ("plug", "plugs", "plugged", "plugging"),
    ("bleed", "bleeds", "bled", "bleeding"),
    ("charge", "charges", "charged", "charging"),
    ("connect", "connects", "connected", "connecting"),
    ("disconnect", "disconnects", "disconnected", "disconnecting"),
    ("deflate", "deflates", "deflated", "deflating"),
    ("inflate", "inflates", "inflated", "inflating"),
    ("mount", "mounts", "mounted", "mounting"),
    ("perform", "performs", "performed", "performing"),
    ("reset", "resets", "reset", "resetting"),
    ("retorque", "retorques", "retorqued", "retorquing"),
    ("cut", "cuts", "cut", "cutting"),
    ("hold", "holds", "held", "holding"),
    ("find", "finds", "found", "finding"),
    ("make", "makes", "made", "making"),
    ("leave", "leaves", "left", "leaving"),
    ("grind", "grinds", "ground", "grinding"),
    ("run", "runs", "ran", "running"),
]

ADJS = """upper lower right forward aft inboard outboard loose tight worn broken cracked
missing new old bad good low high rough excessive intermittent inoperative
damaged defective leaking bent frayed corroded serviceable unserviceable main
auxiliary front rear hot cold dirty clean like minor major normal airworthy
electrical mechanical hydraulic static dynamic external internal""".split()

ADVS = """below above slightly excessively intermittently properly improperly
normally completely partially again""".split()

# Tokens whose lemma must never be mapped through the verb rules.
EXCEPTIONS = {"left", "ground", "found", "bent", "worn", "broken", "missing",
              "leading", "trailing", "landing", "wiring"}


def main(out):
    stemmer = snowballstemmer.stemmer("english")
    entries = {}

    def add(token, pos, lemma):
        if token in entries:
            return
        entries[token] = (pos, lemma)

    # Nouns and adjectives listed first keep their category when a surface
    # form is shared with a verb inflection ("left", "ground", "missing").
    add("left", "NOUN", "left")
    for a in ADJS:
        add(a, "ADJ", a)
    for n in NOUNS:
        add(n, "NOUN", n)
        if n.endswith(("s", "x", "ch", "sh")):
            add(n + "es", "NOUN", n)
        elif n.endswith("y") and n[-2] not in "aeiou":
            add(n[:-1] + "ies", "NOUN", n)
        else:
            add(n + "s", "NOUN", n)
    for a in ADVS:
        add(a, "ADV", a)
    for base, third, past, ger in VERBS:
        for form in (base, third, past, ger):
            add(form, "VERB", base)

    with open(out, "w") as f:
        for token in sorted(entries):
            pos, lemma = entries[token]
            exc = 1 if token in EXCEPTIONS else 0
            if exc:
                lemma = token
            f.write(f"{token}\t{pos}\t{lemma}\t{stemmer.stemWord(token)}\t{exc}\n")
    print(f"{len(entries)} entries", file=sys.stderr)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/resources/lexicon.tsv")
