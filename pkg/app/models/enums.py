from enum import Enum


class IdealProperty(str, Enum):
    prime = "prime"
    semiprime = "semiprime"
    nilary = "nilary"
    p_nilary = "p-nilary"
    right_primary = "right-primary"
    left_primary = "left-primary"
    essential = "essential"


class Verdict(str, Enum):
    confirmed = "confirmed"
    vacuous = "vacuous"
    refuted = "REFUTED"
    undecided_cap = "undecided-cap"


class CheckMode(str, Enum):
    implication = "implication"
    equivalence = "equivalence"
    always = "always"


class SearchTarget(str, Enum):
    question1 = "question1"
    question2 = "question2"
    conjecture1 = "conjecture1"


class Side(str, Enum):
    left = "left"
    right = "right"


class GroupPredicate(str, Enum):
    p_group = "p_group"
    dedekind = "dedekind"
    prime = "prime"
    locally_normal = "locally_normal"
