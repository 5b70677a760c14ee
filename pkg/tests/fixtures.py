"""Hand-built commits used across the test suite."""
from __future__ import annotations

import json

from refaware.vcs import HistoryBuilder

# -- modifier-addition commit: 9 files, 20 lines, 23 refactorings --------------

_PARAM_LINE = "    public void set{k}(int a{k}, int b{k}) {{"
_ATTR_LINE = "    private int count{k};"
_VAR_LINE = "        int tmp{k} = a{k} + b{k};"


def _loc(path, line, text, needle, element_type, element):
    col = text.index(needle) + 1
    return {
        "filePath": path,
        "startLine": line,
        "endLine": line,
        "startColumn": col,
        "endColumn": col + len(needle) - 1,
        "codeElementType": element_type,
        "codeElement": element,
    }


def _modified(kind, k):
    if kind == "param":
        b = _PARAM_LINE.format(k=k)
        return b, b.replace(f"int a{k}", f"final int a{k}").replace(f"int b{k}", f"final int b{k}")
    if kind == "attr":
        b = _ATTR_LINE.format(k=k)
        return b, b.replace("private int", "private final int")
    b = _VAR_LINE.format(k=k)
    return b, b.replace("int tmp", "final int tmp")


MODIFIER_KINDS = ["param"] * 3 + ["attr"] * 10 + ["var"] * 7


def modifier_commit():
    """(repository, report JSON, commit id) for a commit that only adds ``final``.

    Three method headers gain two parameter modifiers each and seventeen
    other lines one attribute or variable modifier each, spread over nine
    files: 20 changed lines explained by 23 instances.
    """
    files = {f: [] for f in range(9)}
    for k, kind in enumerate(MODIFIER_KINDS):
        files[k % 9].append((kind, k))
    before, after, plan = {}, {}, []
    for f, entries in files.items():
        path = f"src/main/java/org/demo/pkg{f % 3}/Unit{f}.java"
        b_lines = [f"package org.demo.pkg{f % 3};", "", f"public class Unit{f} {{"]
        a_lines = list(b_lines)
        for kind, k in entries:
            b, a = _modified(kind, k)
            b_lines.append(b)
            a_lines.append(a)
            plan.append((path, len(b_lines), kind, k, b, a))
            b_lines.append("        // unchanged")
            a_lines.append("        // unchanged")
        b_lines.append("}")
        a_lines.append("}")
        before[path] = "\n".join(b_lines) + "\n"
        after[path] = "\n".join(a_lines) + "\n"

    refactorings = []
    for path, line, kind, k, b, a in plan:
        if kind == "param":
            for name in (f"a{k}", f"b{k}"):
                refactorings.append({
                    "type": "Add Parameter Modifier",
                    "description": f"Add Parameter Modifier final in parameter {name} : int in method public set{k}({name} int) : void",
                    "leftSideLocations": [_loc(path, line, b, f"int {name}", "SINGLE_VARIABLE_DECLARATION", f"{name} : int")],
                    "rightSideLocations": [_loc(path, line, a, f"final int {name}", "SINGLE_VARIABLE_DECLARATION", f"{name} : int")],
                })
        elif kind == "attr":
            refactorings.append({
                "type": "Add Attribute Modifier",
                "description": f"Add Attribute Modifier final in attribute private count{k} : int",
                "leftSideLocations": [_loc(path, line, b, b.strip(), "FIELD_DECLARATION", f"private count{k} : int")],
                "rightSideLocations": [_loc(path, line, a, a.strip(), "FIELD_DECLARATION", f"private count{k} : int")],
            })
        else:
            refactorings.append({
                "type": "Add Variable Modifier",
                "description": f"Add Variable Modifier final in variable tmp{k} : int",
                "leftSideLocations": [{"filePath": path, "startLine": line, "endLine": line, "codeElementType": "VARIABLE_DECLARATION_STATEMENT", "codeElement": f"tmp{k} : int"}],
                "rightSideLocations": [{"filePath": path, "startLine": line, "endLine": line, "codeElementType": "VARIABLE_DECLARATION_STATEMENT", "codeElement": f"tmp{k} : int"}],
            })
    repo = HistoryBuilder().commit("base", before).commit("90b527", after).build()
    report = json.dumps({"commits": [{"repository": "demo", "sha1": "90b527", "refactorings": refactorings}]})
    return repo, report, "90b527"


# -- rename propagation (call site updated after a rename) ---------------------

RESOLVER_BEFORE = """package org.demo.resolver;

public class FileResource {
    private final File _file;

    public FileResource(File _file) {
        this._file = _file;
    }

    public boolean isLocal() {
        return true;
    }

    public InputStream openStream() throws IOException {
        return new FileInputStream(_file);
    }
}
"""

RESOLVER_AFTER = RESOLVER_BEFORE.replace("_file", "file")

# the call site that only changes because of the rename
PROPAGATION_LINE_BEFORE = "        return new FileInputStream(_file);"
PROPAGATION_LINE_AFTER = "        return new FileInputStream(file);"


def propagation_commit(with_report=True):
    """Rename ``_file`` to ``file``; the report names the field rename only."""
    repo = HistoryBuilder().commit("a1", {"FileResource.java": RESOLVER_BEFORE}).commit(
        "ac7066", {"FileResource.java": RESOLVER_AFTER}
    ).build()
    report = None
    if with_report:
        b = RESOLVER_BEFORE.splitlines()
        a = RESOLVER_AFTER.splitlines()
        decl_b = b.index("    private final File _file;") + 1
        decl_a = a.index("    private final File file;") + 1
        report = json.dumps({"commits": [{"sha1": "ac7066", "refactorings": [{
            "type": "Rename Attribute",
            "description": "Rename Attribute _file : File to file : File in class org.demo.resolver.FileResource",
            "leftSideLocations": [{"filePath": "FileResource.java", "startLine": decl_b, "endLine": decl_b,
                                   "startColumn": 5, "endColumn": 30, "codeElementType": "FIELD_DECLARATION",
                                   "codeElement": "_file : File"}],
            "rightSideLocations": [{"filePath": "FileResource.java", "startLine": decl_a, "endLine": decl_a,
                                    "startColumn": 5, "endColumn": 29, "codeElementType": "FIELD_DECLARATION",
                                    "codeElement": "file : File"}],
        }]}]})
    return repo, report, "ac7066"


# -- tangled rename plus edit --------------------------------------------------

TANGLED_BEFORE = """public class Settings {
    public void load(List<String> names) {
        Iterator<String> iter = names.iterator();
        while (iter.hasNext()) {
            register(iter.next());
        }
    }
}
"""

TANGLED_AFTER = """public class Settings {
    public void load(List<String> names) {
        Iterator<String> iterator = names.listIterator();
        while (iterator.hasNext()) {
            register(iterator.next());
        }
    }
}
"""


def tangled_commit():
    """A variable rename whose declaration line also changes the value."""
    repo = HistoryBuilder().commit("b1", {"Settings.java": TANGLED_BEFORE}).commit(
        "56c39", {"Settings.java": TANGLED_AFTER}
    ).build()
    report = json.dumps({"commits": [{"sha1": "56c39", "refactorings": [{
        "type": "Rename Variable",
        "description": "Rename Variable iter : Iterator<String> to iterator : Iterator<String> in method public load(names List<String>) : void from class Settings",
        "leftSideLocations": [
            {"filePath": "Settings.java", "startLine": 3, "endLine": 3, "codeElementType": "SINGLE_VARIABLE_DECLARATION", "codeElement": "iter : Iterator<String>"},
        ],
        "rightSideLocations": [
            {"filePath": "Settings.java", "startLine": 3, "endLine": 3, "codeElementType": "SINGLE_VARIABLE_DECLARATION", "codeElement": "iterator : Iterator<String>"},
        ],
    }]}]})
    return repo, report, "56c39"


# -- a small multi-commit corpus for end-to-end runs ---------------------------


def corpus_descriptor(seed_offset=0):
    """Synthetic-history descriptor mixing renames, moves, edits and fixes."""
    from synth import generate

    repo, bugs, fix, annotations = generate(7 + seed_offset, max_bugs=2)
    return repo.descriptor(), bugs, fix, annotations
