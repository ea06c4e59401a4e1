"""Rule-based shallow parser from command text to logical forms.

This deliberately replaces a full dependency-parse pipeline with a
deterministic lexicon-driven procedure so the reasoning stack stays
testable end to end. The verb lexicon, stopword list, multiword table and
noun-type dictionary ship as data files and are user-extensible.

Conventions baked in here:
  - subject pronoun "I" (incl. "I want to ..." lead-ins) becomes atom `i`
    and is prepended as the first argument;
  - object "me" stays atom `me` (embedding similarity, not normalization,
    is what bridges `me` and `i` downstream);
  - "you" as subject addresses the agent and is dropped; elsewhere it
    becomes atom `corgi`;
  - determiners bridge the tokens around them into one chunk
    ("bring an umbrella" -> bring_umbrella), other stopwords split chunks.
"""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, replace
from importlib.resources import files
from typing import List, Optional, Tuple

from .errors import EmptyClause, MissingClause
from .logic import (Atom, Compound, KnowledgeBase, Number, Term, Variable,
                    functor_arity, num)

_DETERMINERS = {"a", "an", "the", "my", "your", "his", "her", "our", "their",
                "some"}
_SUBJECT_FIRST_PERSON = {"i"}
_SUBJECT_SECOND_PERSON = {"you"}
_LEAD_IN = re.compile(
    r"^(?:please\s+)?i\s+(?:want|would\s+like|need|would\s+love)\s+to\s+",
    re.IGNORECASE)
_LIGHT_LEAD = re.compile(r"^(?:please\s+)?make\s+sure\s+", re.IGNORECASE)


def _data_lines(name: str) -> List[str]:
    text = files("corgi.data").joinpath(name).read_text(encoding="utf-8")
    out = []
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            out.append(line)
    return out


class Lexicon:
    """Verb lexicon + stopwords + multiword table, loaded once."""

    def __init__(self, verbs=None, stopwords=None, multiwords=None):
        self.verbs = set(verbs if verbs is not None else _data_lines("verbs.txt"))
        self.stopwords = set(
            stopwords if stopwords is not None else _data_lines("stopwords.txt"))
        raw_multi = multiwords if multiwords is not None else _data_lines(
            "multiwords.txt")
        self.multiwords = [tuple(m.split()) for m in raw_multi]
        self.multiwords.sort(key=len, reverse=True)

    def verb_base(self, token: str) -> Optional[str]:
        """Base form when the token is a lexicon verb (light stemming)."""
        candidates = [token]
        if token.endswith("ies"):
            candidates.append(token[:-3] + "y")
        if token.endswith("es"):
            candidates.append(token[:-2])
        if token.endswith("s"):
            candidates.append(token[:-1])
        if token.endswith("ed"):
            candidates.extend([token[:-2], token[:-1]])
        if token.endswith("ing"):
            candidates.extend([token[:-3], token[:-3] + "e"])
        for cand in candidates:
            if cand in self.verbs:
                return cand
        return None


_default_lexicon: Optional[Lexicon] = None


def default_lexicon() -> Lexicon:
    global _default_lexicon
    if _default_lexicon is None:
        _default_lexicon = Lexicon()
    return _default_lexicon


def set_default_lexicon(lexicon: Optional[Lexicon]) -> None:
    """Override the parser's lexicon process-wide (None restores packaged)."""
    global _default_lexicon
    _default_lexicon = lexicon


def lexicon_from_dir(path) -> Lexicon:
    """Load verbs.txt, stopwords.txt and multiwords.txt from a directory."""
    from pathlib import Path

    def read(name):
        out = []
        for line in (Path(path) / name).read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if line and not line.startswith("#"):
                out.append(line)
        return out

    return Lexicon(verbs=read("verbs.txt"), stopwords=read("stopwords.txt"),
                   multiwords=read("multiwords.txt"))


@dataclass
class CommandParts:
    state_text: str
    action_text: str
    goal_text: str
    raw: str


@dataclass
class LogicalForm:
    predicate: str
    args: List[Term]
    source_text: str
    aligned: bool = False
    low_confidence: bool = False

    @property
    def term(self) -> Compound:
        return Compound(self.predicate, tuple(self.args))

    @property
    def arity(self) -> int:
        return len(self.args)

    def __str__(self) -> str:
        return str(self.term)


def split_command(text: str) -> CommandParts:
    """Split an if-then-because command into its three clause texts.

    Splits on the first "if", the first subsequent "then" and the first
    "because" after that, all case-insensitive.
    """
    pattern = re.compile(r"\b(if|then|because)\b", re.IGNORECASE)
    state = action = goal = None
    pos = 0
    expecting = "if"
    starts = {}
    for match in pattern.finditer(text):
        word = match.group(1).lower()
        if word == expecting:
            starts[word] = (match.start(), match.end())
            expecting = {"if": "then", "then": "because", "because": None}[word]
            if expecting is None:
                break
    for key in ("if", "then", "because"):
        if key not in starts:
            raise MissingClause(key)
    state = text[starts["if"][1]:starts["then"][0]]
    action = text[starts["then"][1]:starts["because"][0]]
    goal = text[starts["because"][1]:]
    return CommandParts(
        state_text=_trim(state), action_text=_trim(action),
        goal_text=_trim(goal), raw=text)


def _trim(s: str) -> str:
    return s.strip().strip(".!?,;").strip()


def _tokenize(text: str) -> List[str]:
    return re.findall(r"[a-z0-9]+", text.lower())


def _fuse_multiwords(tokens: List[str], lexicon: Lexicon) -> List[Tuple[str, bool]]:
    """Fuse known multiword spans; (token, fused_flag) pairs."""
    out: List[Tuple[str, bool]] = []
    i = 0
    while i < len(tokens):
        for phrase in lexicon.multiwords:
            n = len(phrase)
            if tuple(tokens[i:i + n]) == phrase:
                out.append(("_".join(phrase), True))
                i += n
                break
        else:
            out.append((tokens[i], False))
            i += 1
    return out


def _symbol(token: str) -> Term:
    if token.isdigit():
        return num(int(token))
    if not token[0].isalpha():
        return Atom("x_" + token)
    return Atom(token)


def to_logical_form(clause_text: str, kb: Optional[KnowledgeBase] = None,
                    lexicon: Optional[Lexicon] = None) -> LogicalForm:
    """Extract predicate(args) from one clause of text.

    The predicate is the first verb-lexicon token (the sentence verb),
    falling back to the first non-stopword. Arguments are the remaining
    content chunks; the subject slot is filled with `i` when a first-person
    subject was seen before the verb (or nothing else survives).
    """
    lexicon = lexicon or default_lexicon()
    raw = clause_text
    text = _LIGHT_LEAD.sub("", clause_text.strip())
    text = _LEAD_IN.sub("\x01 ", text)
    had_lead_in = "\x01" in text
    tokens = [t for t in _tokenize(text.replace("\x01", ""))]
    fused = _fuse_multiwords(tokens, lexicon)
    if not fused:
        raise EmptyClause(f"nothing to parse in {clause_text!r}")

    # predicate: first verb hit; "going" before an infinitive is auxiliary
    pred_idx = None
    predicate = None
    for idx, (tok, is_fused) in enumerate(fused):
        if is_fused:
            continue
        if tok in ("going", "gonna") and any(
                lexicon.verb_base(t) for t, f in fused[idx + 1:] if not f):
            continue
        base = lexicon.verb_base(tok)
        if base is not None:
            pred_idx = idx
            predicate = base
            break
    if pred_idx is None:
        for idx, (tok, is_fused) in enumerate(fused):
            if is_fused or tok not in lexicon.stopwords:
                pred_idx = idx
                predicate = tok
                break
    if pred_idx is None:
        raise EmptyClause(f"only stopwords in {clause_text!r}")

    subject_first_person = had_lead_in
    chunks: List[Term] = []
    current: List[str] = []
    bridge = False

    def flush():
        nonlocal current, bridge
        if current:
            chunks.append(_symbol("_".join(current)))
        current = []
        bridge = False

    for idx, (tok, is_fused) in enumerate(fused):
        if idx == pred_idx:
            flush()
            continue
        if idx < pred_idx:
            # pre-verb zone: only note the subject; auxiliaries vanish
            if tok in _SUBJECT_FIRST_PERSON:
                subject_first_person = True
            elif tok in _SUBJECT_SECOND_PERSON:
                pass  # commands address the agent; implicit subject
            elif not is_fused and (tok in lexicon.stopwords
                                   or lexicon.verb_base(tok)
                                   or tok in ("going", "gonna")):
                pass
            else:
                flush()
                current = [tok]
                flush()
            continue
        if is_fused:
            flush()
            chunks.append(_symbol(tok))
            continue
        if tok in ("i", "me"):
            flush()
            chunks.append(Atom("i" if tok == "i" else "me"))
            continue
        if tok in _SUBJECT_SECOND_PERSON:
            flush()
            chunks.append(Atom("corgi"))
            continue
        if tok in _DETERMINERS:
            if current:
                bridge = True
            continue
        if tok in lexicon.stopwords:
            flush()
            continue
        if current and not bridge:
            flush()
        current.append(tok)
        bridge = False
    flush()

    args: List[Term] = list(chunks)
    low_confidence = False
    if subject_first_person:
        args.insert(0, Atom("i"))
    if not args:
        args = [Atom("i")]
        low_confidence = True
    return LogicalForm(predicate=predicate, args=args, source_text=raw,
                       aligned=False, low_confidence=low_confidence)


def _stem(name: str) -> str:
    for suffix in ("ing", "es", "ed", "s"):
        if name.endswith(suffix) and len(name) > len(suffix) + 2:
            return name[:-len(suffix)]
    return name


def _type_compatible(arg_type: str, slot_type: str) -> bool:
    return (arg_type == slot_type or slot_type.endswith(arg_type)
            or arg_type.endswith(slot_type))


def _arg_type(arg: Term, kb: KnowledgeBase) -> str:
    if isinstance(arg, Number):
        return "number"
    if isinstance(arg, Atom):
        return kb.type_of_atom(arg.name)
    return "thing"


def align_with_kb(lf: LogicalForm, kb: KnowledgeBase) -> LogicalForm:
    """Re-order arguments to match a KB signature of the same predicate.

    A signature matches when its functor equals the logical form's predicate
    (exactly or by shared stem) with the same arity. Argument re-ordering is
    type-greedy per slot; leftovers keep their original relative order. The
    argument multiset is never changed.
    """
    matches: List[Term] = []
    seen_heads = set()
    for clause in kb.clauses:
        name, arity = functor_arity(clause.head)
        if arity != lf.arity:
            continue
        if name == lf.predicate or _stem(name) == _stem(lf.predicate):
            if str(clause.head) not in seen_heads:
                seen_heads.add(str(clause.head))
                matches.append(clause.head)
    if not matches:
        return lf
    if len({functor_arity(h) for h in matches}) > 1:
        warnings.warn(
            f"ambiguous alignment for {lf.predicate}/{lf.arity}; "
            "using first signature in program order", stacklevel=2)
    signature = matches[0]

    remaining = list(lf.args)
    slots: List[Optional[Term]] = [None] * len(signature.args)
    for i, slot in enumerate(signature.args):
        pick = None
        for arg in remaining:
            if isinstance(slot, (Atom, Number)):
                if arg == slot:
                    pick = arg
                    break
            elif isinstance(slot, Variable):
                if _type_compatible(_arg_type(arg, kb), slot.type):
                    pick = arg
                    break
        if pick is not None:
            slots[i] = pick
            remaining.remove(pick)
    for i in range(len(slots)):
        if slots[i] is None:
            slots[i] = remaining.pop(0)
    name, _ = functor_arity(signature)
    return replace(lf, predicate=name, args=list(slots), aligned=True)


def predicate_in_kb(lf: LogicalForm, kb: KnowledgeBase) -> bool:
    """The dialog gate: some KB head shares the predicate name/stem and arity."""
    for name, arity in kb.predicates():
        if arity == lf.arity and (
                name == lf.predicate or _stem(name) == _stem(lf.predicate)):
            return True
    return False


def render_goal_text(raw: str) -> str:
    """Human-readable goal text for dialog templates.

    Strips a leading "if", trailing punctuation, and an "I want/need to"
    modal so "I want to remain dry" reads "I remain dry".
    """
    s = raw.strip()
    s = re.sub(r"^\s*if\s+", "", s, flags=re.IGNORECASE)
    s = s.strip().rstrip(".!?,;").strip()
    s = re.sub(r"^(i)\s+(?:want|would\s+like|need|would\s+love)\s+to\s+",
               r"\1 ", s, flags=re.IGNORECASE)
    return s
