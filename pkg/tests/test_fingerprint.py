import csv
import random

import numpy as np
import pytest

import oracles
from fgcompress import Codebook, LexError, fingerprint, fingerprint_corpus, tokenize
from fgcompress.fingerprint import Fingerprinter, write_fingerprint_csv


def cb(*smiles):
    return Codebook.from_smiles(list(smiles))


@pytest.mark.parametrize(
    "molecule, entries, expected",
    [
        ("CC", ["C(=O)N"], [0]),
        ("CC(=O)NC(=O)C", ["C(=O)"], [2]),
        ("CCC", ["CC"], [2]),
        ("ClCCl", ["C", "Cl"], [1, 2]),
        ("CCCC", ["CC", "CCC"], [3, 2]),
    ],
)
def test_counts(molecule, entries, expected):
    assert fingerprint(molecule, cb(*entries)).tolist() == expected


def test_non_overlapping_mode():
    assert fingerprint("CCCC", cb("CC"), overlap=False).tolist() == [2]
    assert fingerprint("CCC", cb("CC"), overlap=False).tolist() == [1]


def test_retired_entries_have_no_column():
    book = cb("C=", "C=C")
    book.set_count(0, 0)
    assert fingerprint("C=CC=O", book).tolist() == [1]


def test_empty_batch():
    batch = fingerprint_corpus([], cb("CC", "CO"))
    assert batch.matrix.shape == (0, 2)


def test_batch_shape():
    batch = fingerprint_corpus(["CCO", "c1ccccc1", "CC(=O)N"], cb("CC", "CO", "c1", "C(=O)", "=O"))
    assert batch.matrix.shape == (3, 5)


def test_batch_rows_match_single_calls():
    rng = random.Random(5)
    mols = oracles.random_corpus(rng, 40, 20)
    book = cb(*sorted({"".join(tokenize(m).texts[:3]) for m in mols}))
    batch = fingerprint_corpus(mols, book, threads=4)
    for i, m in enumerate(mols):
        assert batch.matrix[i].tolist() == fingerprint(m, book).tolist()


def test_batch_collects_lex_errors_with_line_numbers():
    batch = fingerprint_corpus(["CC", "C*C", "CCC"], cb("CC"))
    assert batch.rows == [0, 2]
    assert batch.matrix[:, 0].tolist() == [1, 2]
    assert [line for line, _ in batch.errors] == [2]


def test_single_call_propagates_lex_error():
    with pytest.raises(LexError):
        fingerprint("C[", cb("CC"))


def test_permutation_permutes_rows():
    rng = random.Random(9)
    mols = oracles.random_corpus(rng, 30, 20)
    book = cb("CC", "C(=O)", "c1ccccc1", "(C)", "=O")
    perm = list(range(len(mols)))
    rng.shuffle(perm)
    a = fingerprint_corpus(mols, book).matrix
    b = fingerprint_corpus([mols[i] for i in perm], book).matrix
    assert np.array_equal(a[perm], b)


def random_pair(rng):
    mol = oracles.random_molecule(rng, 20)
    pool = [oracles.random_molecule(rng, 6) for _ in range(6)]
    symbols = tokenize(mol).texts
    # also take windows straight from the molecule so that hits are common
    for _ in range(3):
        i = rng.randrange(len(symbols))
        j = rng.randint(i + 1, min(len(symbols), i + 6))
        pool.append("".join(symbols[i:j]))
    entries = list(dict.fromkeys(pool))
    return mol, entries


def test_matches_naive_window_oracle():
    rng = random.Random(2024)
    for _ in range(300):
        mol, entries = random_pair(rng)
        got = fingerprint(mol, cb(*entries)).tolist()
        symbols = tokenize(mol).texts
        assert got == [oracles.count_windows(symbols, tokenize(e).texts) for e in entries]


def test_fingerprinter_reusable():
    fp = Fingerprinter(cb("CC"))
    assert len(fp) == 1
    assert fp("CCC").tolist() == [2] and fp("C").tolist() == [0]


def test_csv_layout(tmp_path):
    book = cb("C(=O)", "CC")
    batch = fingerprint_corpus(["CC(=O)O", "CCC"], book)
    path = tmp_path / "fp.csv"
    write_fingerprint_csv(path, batch, book)
    raw = path.read_bytes()
    assert b"\r\n" not in raw
    rows = list(csv.reader(raw.decode("utf-8").splitlines()))
    assert rows[0] == ["smiles", "0:C(=O)", "1:CC"]
    assert rows[1:] == [["CC(=O)O", "1", "1"], ["CCC", "0", "2"]]
    assert raw.splitlines()[0] == b'"smiles","0:C(=O)","1:CC"'
