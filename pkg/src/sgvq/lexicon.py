"""Embedded part-of-speech lexicon and verb morphology tables.

Verbs are listed in base form only; inflected forms are recognized by
lemmatizing first.  The table can be extended or overridden from a
``word<TAB>TAG`` file via :func:`load_lexicon_file`.
"""

from __future__ import annotations

from pathlib import Path

TAGS = ("NOUN", "VERB", "ADJ", "PREP", "DET", "COP", "OTHER")

_NOUNS = """
man woman boy girl person people child baby player chef cook guy lady kid crowd group team
dog cat horse bird cow sheep elephant giraffe zebra bear animal puppy kitten fish duck
shirt t-shirt jacket coat suit tie hat cap helmet dress skirt pants jeans shorts shoe shoes
sneaker boot glasses sunglasses scarf sweater hoodie uniform apron glove gloves bag backpack
hair beard mustache face head hand arm leg eye eyes nose mouth ear ears finger tail fur paw
table chair bench couch sofa bed pillow blanket desk shelf counter cabinet door window wall
floor ceiling roof stairs fence sign pole light lamp clock picture painting mirror curtain
kitchen room house building street road sidewalk park field grass tree trees sky cloud water
beach ocean sea river lake mountain snow sand ground city store restaurant bar stage
car truck bus bike bicycle motorcycle train boat plane skateboard surfboard wave
pizza food plate bowl cup mug glass bottle jar beer wine coffee tea sandwich cake bread
fruit apple banana orange vegetable salad meat knife fork spoon pan pot stove oven sink
microphone guitar drum piano speaker phone laptop computer screen television camera book
paper box ball frisbee racket bat kite umbrella toy flower flowers vase plant basket
rug carpet towel napkin board
""".split()

_VERBS = """
wear hold sit stand play eat drink ride walk run jump throw catch feed look watch lie lay
sleep cook cut chop stir pour serve carry hang cover sing dance talk smile laugh hit kick
swim fly read write use open close hug kiss push pull wash clean paint drive park fill
make take put place show point pick touch grab cross climb skate surf ski rest lean wait
have has had hold fix prepare slice mix bake fry boil grill perform dress pose sell buy
""".split()

_ADJECTIVES = """
tall short fat thin big small large little long old young new black white red blue green
yellow brown gray grey orange pink purple dark light bright clean dirty wet dry empty full
happy sad smiling wooden metal plastic glass open closed round square striped plaid curly
straight blond blonde bald wide narrow heavy hot cold warm fresh ripe sliced cooked raw
pretty beautiful cute ugly fluffy furry shiny colorful wooden tiled
one two three four five six seven eight nine ten several many few
""".split()

_PREPOSITIONS = """
on in at with by near under behind beside above below over into onto from of to through
across along around against inside outside between toward towards for up down off out
""".split()

_DETERMINERS = """
a an the this these those his her their its my our your some each every another
""".split()

_COPULAS = "is are was were be been being am".split()

_OTHER = """
and or that who which what where when why how does did do not no there it he she they
very while also then just too
""".split()

# Ordered from weakest to strongest so later tables override earlier ones.
DEFAULT_LEXICON: dict[str, str] = {}
for _words, _tag in (
    (_NOUNS, "NOUN"),
    (_VERBS, "VERB"),
    (_ADJECTIVES, "ADJ"),
    (_PREPOSITIONS, "PREP"),
    (_DETERMINERS, "DET"),
    (_COPULAS, "COP"),
    (_OTHER, "OTHER"),
):
    for _w in _words:
        DEFAULT_LEXICON[_w] = _tag
# Words listed under several tags; the caption reading wins.
DEFAULT_LEXICON.update(
    {"dress": "NOUN", "park": "NOUN", "glass": "NOUN", "light": "ADJ", "orange": "ADJ", "open": "ADJ", "clean": "ADJ"}
)

VERB_BASES = frozenset(w for w, t in DEFAULT_LEXICON.items() if t == "VERB")

IRREGULAR_VERBS: dict[str, str] = {
    "ate": "eat", "eaten": "eat", "sat": "sit", "wore": "wear", "worn": "wear",
    "threw": "throw", "thrown": "throw", "held": "hold", "stood": "stand", "ran": "run",
    "rode": "ride", "ridden": "ride", "took": "take", "taken": "take", "drank": "drink",
    "drunk": "drink", "flew": "fly", "flown": "fly", "fed": "feed", "caught": "catch",
    "hung": "hang", "lay": "lie", "lain": "lie", "slept": "sleep", "sang": "sing", "sung": "sing",
    "made": "make", "put": "put", "cut": "cut", "hit": "hit", "read": "read", "wrote": "write",
    "written": "write", "drove": "drive", "driven": "drive", "swam": "swim", "bought": "buy",
    "sold": "sell", "brought": "bring", "went": "go", "gone": "go", "came": "come",
    "gave": "give", "given": "give", "saw": "see", "seen": "see", "got": "get", "gotten": "get",
    "left": "leave", "fell": "fall", "fallen": "fall", "built": "build", "kept": "keep",
    "had": "have", "has": "have", "does": "do", "did": "do", "done": "do", "fried": "fry",
    "lying": "lie", "tying": "tie", "dying": "die", "played": "play",
    "adding": "add", "added": "add", "goes": "go",
}

# Stems that lose a final "e" before -ing/-ed.
SILENT_E_STEMS = frozenset(
    """
    ride make take drive smile dance skate write slide serve prepare use hide chase bake
    come give have leave move place pose raise shave type close dine glide wave share
    skate tape type race rinse slice dive hope joke like love live bite rake store pile
    smoke vote paste taste graze wipe squeeze breathe bathe tie line file arrange
    """.split()
)

# Doubled final consonants that are undoubled after stripping a suffix.
UNDOUBLE = frozenset("bdgmnprt")


def load_lexicon_file(path: str | Path, base: dict[str, str] | None = None) -> dict[str, str]:
    """Read ``word<TAB>TAG`` lines over a copy of ``base`` (default: embedded table)."""
    lexicon = dict(DEFAULT_LEXICON if base is None else base)
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2 or parts[1].strip().upper() not in TAGS:
            raise ValueError(f"{path}:{lineno}: expected 'word<TAB>TAG' with TAG in {TAGS}")
        lexicon[parts[0].strip().lower()] = parts[1].strip().upper()
    return lexicon
