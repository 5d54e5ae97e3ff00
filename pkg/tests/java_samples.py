"""Java method fixtures shared by the rolemark test modules."""

from __future__ import annotations

STEPPER_LOOP = "void f(){ for (int i=0; i<5; i++){} }"

COUNT_LOOP = "void f(){ for (int count=0 ; count<10; count++){ sum += count; } }"
COUNT_LOOP_AUGMENTED = (
    "void f(){ for (int stepper_count=0 ; stepper_count<10; stepper_count++){ sum += stepper_count; } }"
)

HALVING_LOOP = (
    "int g(int n){ int steps = 0; for (int size=n; size>0; size = size/2){ steps++; } return steps; }"
)

ENHANCED_FOR = "void f(String[] Elements){ for (String elem: Elements) {} }"

ITERATOR_LOOP = (
    "void h(List<String> items){\n"
    "    Iterator<String> iter = items.iterator();\n"
    "    while (iter.hasNext()){ iter.next(); }\n"
    "}"
)

ENUMERATION_LOOP = """\
int countKeys(Hashtable<String, Integer> table) {
    int keys = 0;
    Enumeration<String> e = table.keys();
    while (e.hasMoreElements()) {
        e.nextElement();
        keys++;
    }
    return keys;
}"""

GENERIC_TRY_LAMBDA = """\
@SuppressWarnings("unchecked")
public static <T extends Comparable<T>> int countAbove(List<T> values, T pivot) throws IOException {
    int above = 0;
    // count the values strictly greater than pivot
    for (int k = values.size() - 1; k >= 0; k -= 1) {
        T candidate = values.get(k);
        if (candidate.compareTo(pivot) > 0) {
            above++;
        }
    }
    try (BufferedReader reader = new BufferedReader(new FileReader("x.txt"))) {
        String line = reader.readLine();
        above += line == null ? 0 : (int) line.length();
    } catch (IOException | RuntimeException e) {
        throw new IllegalStateException("failed: " + e.getMessage(), e);
    }
    Runnable r = () -> System.out.println(pivot);
    int[][] grid = new int[3][4];
    grid[0][1] = above << 2;
    return above;
}"""

SWITCH_METHOD = """\
String label(int code) {
    String result;
    switch (code) {
        case 1: result = "one"; break;
        default: result = "many";
    }
    return result;
}"""

LABELED_DO_WHILE = """\
int search(int[][] rows, int target) {
    int found = -1;
    outer:
    for (int r = 0; r < rows.length; r++) {
        for (int c = 0; c < rows[r].length; c++) {
            if (rows[r][c] == target) { found = r; break outer; }
        }
    }
    int tries = 0;
    do { tries++; } while (tries < 3 && found < 0);
    return found;
}"""

ANONYMOUS_CLASS = """\
Comparator<String> byLength() {
    int bias = 1;
    return new Comparator<String>() {
        public int compare(String a, String b) { return a.length() - b.length() + bias; }
    };
}"""

UNICODE_TEXT = (
    "String greet(String name){ /* h\u00e9llo, i++ */ return \"\u00a1hola \" + name + \"\\u00e9\"; }"
)

SYNCHRONIZED_ASSERT = """\
synchronized void update(Object value) {
    assert value != null : "value";
    synchronized (this) {
        if (value instanceof String) {
            this.cache = (String) value;
        }
    }
}"""

NESTED_GENERICS = """\
void index(List<String> words) {
    Map<String, List<Map<Integer, String>>> index = new HashMap<>();
    for (String w : words) {
        index.computeIfAbsent(w, key -> new ArrayList<>()).add(new HashMap<>());
    }
}"""

METHOD_REFERENCE = (
    "List<String> upper(List<String> xs){ return xs.stream().map(String::toUpperCase)"
    ".collect(Collectors.toList()); }"
)

PARSEABLE_METHODS = (
    STEPPER_LOOP,
    COUNT_LOOP,
    HALVING_LOOP,
    ENHANCED_FOR,
    ITERATOR_LOOP,
    ENUMERATION_LOOP,
    GENERIC_TRY_LAMBDA,
    SWITCH_METHOD,
    LABELED_DO_WHILE,
    ANONYMOUS_CLASS,
    UNICODE_TEXT,
    SYNCHRONIZED_ASSERT,
    NESTED_GENERICS,
    METHOD_REFERENCE,
)

BROKEN_METHODS = (
    "void f(){ for (int i=0; i<5; i++ }",
    "void f( { }",
    "int x = 3;",
    "void f(){ String s = \"unterminated; }",
    "}}}{{{",
)
