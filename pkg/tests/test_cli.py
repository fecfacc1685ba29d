"""
End-to-end tests of the command-line surface.
"""
import contextlib
import io
import json
import os
import sys
import tempfile
import unittest

sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from src.bhf_io import read_bhf, write_bhf
from src.cli import main
from src.core import OCCUPIED, band_projector, circle, suspension
from src.models import dirac_monopole, phase_winding


def run(*argv):
    """Run the CLI, returning (status, stdout, stderr)."""
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        status = main(["--quiet", *argv])
    return status, out.getvalue(), err.getvalue()


class TestCLI(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def path(self, name):
        return os.path.join(self.tmp.name, name)

    def test_ssh_to_monopole_pipeline(self):
        """model → suspend → invariant c1 gives −1 for the empty band."""
        self.assertEqual(run("model", "ssh", "--v", "0", "--w", "1", "--n", "16", "-o", self.path("ssh.bhf"))[0], 0)
        self.assertEqual(run("suspend", self.path("ssh.bhf"), "--nt", "17", "-o", self.path("mono.bhf"))[0], 0)
        status, out, _ = run("invariant", "c1", self.path("mono.bhf"), "--band", "empty")
        self.assertEqual(status, 0)
        report = json.loads(out)
        self.assertEqual(report["value"], -1)
        self.assertIn("residual", report)
        self.assertEqual(report["grid"]["kind"], "suspension")

    def test_clutch_and_winding(self):
        """clutch writes a unitary family whose winding is 1."""
        run("model", "ssh", "--n", "16", "-o", self.path("ssh.bhf"))
        run("suspend", self.path("ssh.bhf"), "--nt", "17", "-o", self.path("mono.bhf"))
        self.assertEqual(run("clutch", self.path("mono.bhf"), "-o", self.path("u.bhf"))[0], 0)
        status, out, _ = run("invariant", "winding", self.path("u.bhf"))
        self.assertEqual(json.loads(out)["value"], 1)

    def test_constant_winding(self):
        """A constant unitary winds zero times."""
        write_bhf(phase_winding(0, circle(16)), self.path("id.bhf"))
        status, out, _ = run("invariant", "winding", self.path("id.bhf"))
        self.assertEqual((status, json.loads(out)["value"]), (0, 0))

    def test_reflect(self):
        """reflect flips the monopole charge."""
        run("model", "monopole", "--n", "16", "--nt", "16", "-o", self.path("mono.bhf"))
        run("reflect", self.path("mono.bhf"), "--axis", "0", "-o", self.path("flip.bhf"))
        status, out, _ = run("invariant", "c1", self.path("flip.bhf"), "--band", "empty")
        self.assertEqual(json.loads(out)["value"], 1)

    def test_curvature_method_and_dump(self):
        """--method curvature reports the Riemann sum; --dump-curvature writes a CSV."""
        run("model", "massive-dirac", "--M", "1", "--n", "32", "-o", self.path("cd.bhf"))
        csv = self.path("density.csv")
        status, out, _ = run("invariant", "c1", self.path("cd.bhf"), "--band", "occupied",
                             "--method", "curvature", "--dump-curvature", csv)
        report = json.loads(out)
        self.assertEqual((status, report["value"], report["extra"]["link_value"]), (0, 1, 1))
        with open(csv, encoding="utf-8") as f:
            lines = f.read().splitlines()
        self.assertEqual(lines[0], "k1,k2,density")
        self.assertEqual(len(lines), 1 + 32 * 32)

    def test_product(self):
        """product writes the 12×12 star product."""
        run("model", "monopole", "--n", "6", "--nt", "7", "-o", self.path("m.bhf"))
        self.assertEqual(run("product", self.path("m.bhf"), self.path("m.bhf"), "-o", self.path("mm.bhf"))[0], 0)
        self.assertEqual(read_bhf(self.path("mm.bhf")).dim, 12)

    def test_kring(self):
        """kring eval prints the canonical form."""
        self.assertEqual(run("kring", "eval", "b1*b1", "--d", "1")[1].strip(), "0")
        self.assertEqual(run("kring", "eval", "(1+b1)*(1+b2)", "--d", "2")[1].strip(), "1 + b1 + b2 + b1b2")

    def test_error_line(self):
        """Module errors exit 1 with one JSON line on stderr."""
        status, _, err = run("kring", "eval", "b1 +", "--d", "1")
        self.assertEqual(status, 1)
        payload = json.loads(err.strip())
        self.assertEqual(payload["error"], "kring-syntax")
        self.assertEqual(len(err.strip().splitlines()), 1)

    def test_gapless_model_error(self):
        """Gapless families are reported with the gap-violation code."""
        run("model", "ssh", "--v", "1", "--w", "1", "--n", "16", "-o", self.path("gapless.bhf"))
        status, _, err = run("invariant", "winding", self.path("gapless.bhf"))
        self.assertEqual(status, 1)
        self.assertIn(json.loads(err)["error"], ("not-flat", "gap-violation"))

    def assertErrorLine(self, code, *argv):
        status, out, err = run(*argv)
        self.assertEqual(status, 1)
        self.assertEqual(out, "")
        lines = err.strip().splitlines()
        self.assertEqual(len(lines), 1)
        self.assertEqual(json.loads(lines[0])["error"], code)

    def test_wrong_family_types(self):
        """Unitary or mixed inputs give a shape-mismatch line, not a traceback."""
        write_bhf(phase_winding(1, circle(16)), self.path("u.bhf"))
        monopole = dirac_monopole(suspension(circle(6), 7))
        write_bhf(monopole, self.path("h.bhf"))
        write_bhf(band_projector(monopole, OCCUPIED), self.path("p.bhf"))
        self.assertErrorLine("shape-mismatch", "suspend", self.path("u.bhf"), "--nt", "9")
        self.assertErrorLine("shape-mismatch", "suspend", self.path("p.bhf"), "--nt", "9")
        self.assertErrorLine("shape-mismatch", "product", self.path("u.bhf"), self.path("u.bhf"))
        self.assertErrorLine("shape-mismatch", "product", self.path("p.bhf"), self.path("h.bhf"))
        self.assertErrorLine("shape-mismatch", "clutch", self.path("p.bhf"))

    def test_bad_model_parameters(self):
        """Non-finite or fractional parameters give an invalid-parameter line."""
        self.assertErrorLine("invalid-parameter", "model", "ssh", "--v", "nan")
        self.assertErrorLine("invalid-parameter", "model", "winding-chain", "--w", "1.5")
        self.assertErrorLine("invalid-parameter", "model", "phase-winding", "--w", "-0.5")

    def test_missing_file(self):
        """I/O failures also produce a JSON error line."""
        status, _, err = run("clutch", self.path("missing.bhf"))
        self.assertEqual((status, json.loads(err)["error"]), (1, "io"))

    def test_deterministic_output(self):
        """Identical inputs give byte-identical files."""
        run("model", "dirac5", "--chart", "sphere", "--n", "4", "--nt", "4", "-o", self.path("a.bhf"))
        run("model", "dirac5", "--chart", "sphere", "--n", "4", "--nt", "4", "-o", self.path("b.bhf"))
        with open(self.path("a.bhf"), "rb") as a, open(self.path("b.bhf"), "rb") as b:
            self.assertEqual(a.read(), b.read())


if __name__ == "__main__":
    unittest.main()
