"""Template-generated Java methods whose roles are known when they are built.

Used by the benchmark script and the tests: every method records the names it
was built to carry as steppers and walkers, so detection and corpus statistics
can be checked against construction-time truth.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable, Dict, List, Sequence, Tuple

from .base import DEFAULT_SEED, DEFAULT_SPLIT
from .corpus import CorpusManifest, MethodRecord, Provenance, build_manifest


@dataclass(frozen=True)
class SyntheticMethod:
    method_id: str
    source: str
    template: str
    steppers: Tuple[str, ...] = ()
    walkers: Tuple[str, ...] = ()
    conflicts: Tuple[str, ...] = ()

    @property
    def augmented(self) -> bool:
        return bool(self.steppers or self.walkers)


# A template takes the method-name suffix and a variable name and returns the
# source plus the expected stepper and walker names.
Template = Callable[[str, str], Tuple[str, Tuple[str, ...], Tuple[str, ...]]]

STEPPER_NAMES = ("i", "j", "k", "idx", "count", "pos", "row")
HALVING_NAMES = ("size", "half", "width", "span")
WALKER_NAMES = ("elem", "item", "entry", "word", "value")
ITERATOR_NAMES = ("iter", "it", "cursor", "walk")
PLAIN_NAMES = ("result", "acc", "tmp", "level", "current")


def _counting_loop(suffix: str, var: str) -> Tuple[str, Tuple[str, ...], Tuple[str, ...]]:
    source = (
        f"public int sumUpTo{suffix}(int n) {{\n"
        f"    int total = 0;\n"
        f"    for (int {var} = 0; {var} < n; {var}++) {{\n"
        f"        total += {var};\n"
        f"    }}\n"
        f"    return total;\n"
        f"}}"
    )
    return source, (var,), ()


def _halving_loop(suffix: str, var: str) -> Tuple[str, Tuple[str, ...], Tuple[str, ...]]:
    source = (
        f"int halvings{suffix}(int n) {{\n"
        f"    int steps = 0;\n"
        f"    for (int {var} = n; {var} > 0; {var} = {var} / 2) {{\n"
        f"        steps++;\n"
        f"    }}\n"
        f"    return steps;\n"
        f"}}"
    )
    return source, (var,), ()


def _doubling_loop(suffix: str, var: str) -> Tuple[str, Tuple[str, ...], Tuple[str, ...]]:
    source = (
        f"static long lastPower{suffix}(long limit) {{\n"
        f"    long last = 1;\n"
        f"    for (long {var} = 1; {var} < limit; {var} *= 2) {{\n"
        f"        last = {var};\n"
        f"    }}\n"
        f"    return last;\n"
        f"}}"
    )
    return source, (var,), ()


def _enhanced_for(suffix: str, var: str) -> Tuple[str, Tuple[str, ...], Tuple[str, ...]]:
    source = (
        f"public int countMatches{suffix}(List<String> items, String target) {{\n"
        f"    int hits = 0;\n"
        f"    for (String {var} : items) {{\n"
        f"        if ({var}.equals(target)) {{\n"
        f"            hits++;\n"
        f"        }}\n"
        f"    }}\n"
        f"    return hits;\n"
        f"}}"
    )
    return source, (), (var,)


def _iterator_loop(suffix: str, var: str) -> Tuple[str, Tuple[str, ...], Tuple[str, ...]]:
    source = (
        f"void drainItems{suffix}(List<String> items) {{\n"
        f"    Iterator<String> {var} = items.iterator();\n"
        f"    while ({var}.hasNext()) {{\n"
        f"        System.out.println({var}.next());\n"
        f"    }}\n"
        f"}}"
    )
    return source, (), (var,)


def _enumeration_loop(suffix: str, var: str) -> Tuple[str, Tuple[str, ...], Tuple[str, ...]]:
    source = (
        f"int countKeys{suffix}(Hashtable<String, Integer> table) {{\n"
        f"    int keys = 0;\n"
        f"    Enumeration<String> {var} = table.keys();\n"
        f"    while ({var}.hasMoreElements()) {{\n"
        f"        {var}.nextElement();\n"
        f"        keys++;\n"
        f"    }}\n"
        f"    return keys;\n"
        f"}}"
    )
    return source, (), (var,)


def _nested_mixed(suffix: str, var: str) -> Tuple[str, Tuple[str, ...], Tuple[str, ...]]:
    source = (
        f"int weightedSum{suffix}(List<Integer> values) {{\n"
        f"    int sum = 0;\n"
        f"    for (int i = 0; i < 3; i++) {{\n"
        f"        for (Integer {var} : values) {{\n"
        f"            sum += {var} * i;\n"
        f"        }}\n"
        f"    }}\n"
        f"    return sum;\n"
        f"}}"
    )
    return source, ("i",), (var,)


def _string_while(suffix: str, var: str) -> Tuple[str, Tuple[str, ...], Tuple[str, ...]]:
    source = (
        f"String padTo{suffix}(String base, int width) {{\n"
        f"    String {var} = base;\n"
        f"    while ({var}.length() < width) {{\n"
        f"        {var} = {var} + \" \";\n"
        f"    }}\n"
        f"    return {var};\n"
        f"}}"
    )
    return source, (), ()


def _plain_local(suffix: str, var: str) -> Tuple[str, Tuple[str, ...], Tuple[str, ...]]:
    source = (
        f"private int scaled{suffix}(int value) {{\n"
        f"    int {var} = value * 3;\n"
        f"    return {var} + 1;\n"
        f"}}"
    )
    return source, (), ()


def _while_counter(suffix: str, var: str) -> Tuple[str, Tuple[str, ...], Tuple[str, ...]]:
    source = (
        f"int countDown{suffix}(int start) {{\n"
        f"    int {var} = start;\n"
        f"    int ticks = 0;\n"
        f"    while ({var} > 0) {{\n"
        f"        {var}--;\n"
        f"        ticks++;\n"
        f"    }}\n"
        f"    return ticks;\n"
        f"}}"
    )
    return source, (), ()


def _char_loop(suffix: str, var: str) -> Tuple[str, Tuple[str, ...], Tuple[str, ...]]:
    # char is not numeric for stepper purposes.
    source = (
        f"String letters{suffix}() {{\n"
        f"    StringBuilder out = new StringBuilder();\n"
        f"    for (char {var} = 'a'; {var} <= 'z'; {var}++) {{\n"
        f"        out.append({var});\n"
        f"    }}\n"
        f"    return out.toString();\n"
        f"}}"
    )
    return source, (), ()


def _countdown_loop(suffix: str, var: str) -> Tuple[str, Tuple[str, ...], Tuple[str, ...]]:
    source = (
        f"int lastOdd{suffix}(int[] data) {{\n"
        f"    for (int {var} = data.length - 1; {var} >= 0; {var}--) {{\n"
        f"        if (data[{var}] % 2 == 1) {{\n"
        f"            return {var};\n"
        f"        }}\n"
        f"    }}\n"
        f"    return -1;\n"
        f"}}"
    )
    return source, (var,), ()


def _stride_down_loop(suffix: str, var: str) -> Tuple[str, Tuple[str, ...], Tuple[str, ...]]:
    source = (
        f"int strideSum{suffix}(int[] data, int stride) {{\n"
        f"    int total = 0;\n"
        f"    for (int {var} = data.length - 1; {var} >= 0; {var} -= stride) {{\n"
        f"        total += data[{var}];\n"
        f"    }}\n"
        f"    return total;\n"
        f"}}"
    )
    return source, (var,), ()


def _shift_loop(suffix: str, var: str) -> Tuple[str, Tuple[str, ...], Tuple[str, ...]]:
    source = (
        f"int bitLength{suffix}(int mask) {{\n"
        f"    int bits = 0;\n"
        f"    for (int {var} = mask; {var} != 0; {var} >>= 1) {{\n"
        f"        bits++;\n"
        f"    }}\n"
        f"    return bits;\n"
        f"}}"
    )
    return source, (var,), ()


def _boxed_loop(suffix: str, var: str) -> Tuple[str, Tuple[str, ...], Tuple[str, ...]]:
    source = (
        f"List<Integer> firstN{suffix}(int n) {{\n"
        f"    List<Integer> out = new ArrayList<>();\n"
        f"    for (Integer {var} = 0; {var} < n; {var} = {var} + 1) {{\n"
        f"        out.add({var});\n"
        f"    }}\n"
        f"    return out;\n"
        f"}}"
    )
    return source, (var,), ()


def _boxed_long_loop(suffix: str, var: str) -> Tuple[str, Tuple[str, ...], Tuple[str, ...]]:
    source = (
        f"Long powerOfThree{suffix}(Long limit) {{\n"
        f"    Long last = 1L;\n"
        f"    for (Long {var} = 1L; {var} < limit; {var} *= 3) {{\n"
        f"        last = {var};\n"
        f"    }}\n"
        f"    return last;\n"
        f"}}"
    )
    return source, (var,), ()


def _two_pointer_loop(suffix: str, var: str) -> Tuple[str, Tuple[str, ...], Tuple[str, ...]]:
    source = (
        f"void reverse{suffix}(int[] data) {{\n"
        f"    for (int {var} = 0, end = data.length - 1; {var} < end; {var}++, end--) {{\n"
        f"        int swap = data[{var}];\n"
        f"        data[{var}] = data[end];\n"
        f"        data[end] = swap;\n"
        f"    }}\n"
        f"}}"
    )
    return source, (var, "end"), ()


def _assigned_init_loop(suffix: str, var: str) -> Tuple[str, Tuple[str, ...], Tuple[str, ...]]:
    source = (
        f"int firstZero{suffix}(int[] data) {{\n"
        f"    int {var};\n"
        f"    for ({var} = 0; {var} < data.length; {var} += 1) {{\n"
        f"        if (data[{var}] == 0) {{\n"
        f"            break;\n"
        f"        }}\n"
        f"    }}\n"
        f"    return {var};\n"
        f"}}"
    )
    return source, (var,), ()


def _iterator_for_loop(suffix: str, var: str) -> Tuple[str, Tuple[str, ...], Tuple[str, ...]]:
    source = (
        f"int countLong{suffix}(List<String> items) {{\n"
        f"    int longOnes = 0;\n"
        f"    for (Iterator<String> {var} = items.iterator(); {var}.hasNext(); ) {{\n"
        f"        if ({var}.next().length() > 8) {{\n"
        f"            longOnes++;\n"
        f"        }}\n"
        f"    }}\n"
        f"    return longOnes;\n"
        f"}}"
    )
    return source, (), (var,)


def _walker_reused_as_stepper(
    suffix: str, var: str
) -> Tuple[str, Tuple[str, ...], Tuple[str, ...]]:
    # The enhanced-for variable is also stepped by the inner loop; Stepper wins.
    source = (
        f"int reuse{suffix}(List<Integer> values) {{\n"
        f"    int sum = 0;\n"
        f"    for (Integer {var} : values) {{\n"
        f"        for ({var} = 0; {var} < 3; {var}++) {{\n"
        f"            sum += {var};\n"
        f"        }}\n"
        f"    }}\n"
        f"    return sum;\n"
        f"}}"
    )
    return source, (var,), ()


def _call_update_loop(suffix: str, var: str) -> Tuple[str, Tuple[str, ...], Tuple[str, ...]]:
    # The update is a plain call, not arithmetic on the variable.
    source = (
        f"int chainLength{suffix}(int start) {{\n"
        f"    int hops = 0;\n"
        f"    for (int {var} = start; {var} > 0; {var} = successor({var})) {{\n"
        f"        hops++;\n"
        f"    }}\n"
        f"    return hops;\n"
        f"}}"
    )
    return source, (), ()


ROLE_TEMPLATES: Dict[str, Tuple[Template, Sequence[str]]] = {
    "counting-loop": (_counting_loop, STEPPER_NAMES),
    "countdown-loop": (_countdown_loop, STEPPER_NAMES),
    "stride-down-loop": (_stride_down_loop, STEPPER_NAMES),
    "shift-loop": (_shift_loop, HALVING_NAMES),
    "halving-loop": (_halving_loop, HALVING_NAMES),
    "doubling-loop": (_doubling_loop, STEPPER_NAMES),
    "boxed-loop": (_boxed_loop, STEPPER_NAMES),
    "boxed-long-loop": (_boxed_long_loop, STEPPER_NAMES),
    "two-pointer-loop": (_two_pointer_loop, STEPPER_NAMES),
    "assigned-init-loop": (_assigned_init_loop, STEPPER_NAMES),
    "enhanced-for": (_enhanced_for, WALKER_NAMES),
    "iterator-loop": (_iterator_loop, ITERATOR_NAMES),
    "iterator-for-loop": (_iterator_for_loop, ITERATOR_NAMES),
    "enumeration-loop": (_enumeration_loop, ITERATOR_NAMES),
    "nested-mixed": (_nested_mixed, WALKER_NAMES),
    "walker-reused-as-stepper": (_walker_reused_as_stepper, WALKER_NAMES),
}

# Templates whose steppers were also detected as walkers before precedence.
CONFLICT_TEMPLATES = frozenset({"walker-reused-as-stepper"})

PLAIN_TEMPLATES: Dict[str, Tuple[Template, Sequence[str]]] = {
    "string-while": (_string_while, PLAIN_NAMES),
    "plain-local": (_plain_local, PLAIN_NAMES),
    "while-counter": (_while_counter, PLAIN_NAMES),
    "char-loop": (_char_loop, ("c", "ch", "letter")),
    "call-update-loop": (_call_update_loop, PLAIN_NAMES),
}


def _build(
    rng: random.Random,
    templates: Dict[str, Tuple[Template, Sequence[str]]],
    index: int,
) -> SyntheticMethod:
    name = rng.choice(sorted(templates))
    template, pool = templates[name]
    source, steppers, walkers = template(str(index), rng.choice(pool))
    return SyntheticMethod(
        method_id=f"synthetic/{index:06d}",
        source=source,
        template=name,
        steppers=steppers,
        walkers=walkers,
        conflicts=steppers if name in CONFLICT_TEMPLATES else (),
    )


def generate_methods(
    count: int,
    *,
    augmented: int,
    seed: int = DEFAULT_SEED,
) -> List[SyntheticMethod]:
    """``count`` methods of which exactly ``augmented`` carry at least one role."""
    if count < 0 or not 0 <= augmented <= count:
        raise ValueError(
            f"augmented must be between 0 and count ({count}), got {augmented}."
        )
    rng = random.Random(seed)
    with_roles = set(rng.sample(range(count), augmented))
    return [
        _build(rng, ROLE_TEMPLATES if index in with_roles else PLAIN_TEMPLATES, index)
        for index in range(count)
    ]


def expected_counts(methods: Sequence[SyntheticMethod]) -> Dict[str, int]:
    return {
        "methods": len(methods),
        "augmentedMethods": sum(1 for method in methods if method.augmented),
        "steppers": sum(len(method.steppers) for method in methods),
        "walkers": sum(len(method.walkers) for method in methods),
    }


def synthetic_corpus(
    methods: Sequence[SyntheticMethod],
    *,
    split: str = DEFAULT_SPLIT,
    source_path: str = "<synthetic>",
) -> CorpusManifest:
    records = [
        MethodRecord(method_id=method.method_id, source=method.source, split=split)
        for method in methods
    ]
    return build_manifest(records, Provenance(source_path=source_path))


__all__ = [
    "SyntheticMethod",
    "ROLE_TEMPLATES",
    "PLAIN_TEMPLATES",
    "CONFLICT_TEMPLATES",
    "generate_methods",
    "expected_counts",
    "synthetic_corpus",
]
