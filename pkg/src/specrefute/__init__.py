"""Refuting spectral quantum marginal problems with a symmetry-reduced
semidefinite hierarchy over permutation invariants."""

__version__ = "0.1.0"

from .assembler import BlockSDP, CapacityError, assemble, size_report
from .marginals import Generator, SpectrumSet, enumerate_generators, generator_value, power_sum
from .permrep import Partition, Permutation, character_mn, rep_matrix, syt_enumerate
from .problems import dump_problem, load_problem, read_certificate, write_certificate
from .refuter import Certificate, Status, Verdict, dimension_free_flag, refute, verify_certificate

__all__ = [
    "BlockSDP", "CapacityError", "assemble", "size_report",
    "Generator", "SpectrumSet", "enumerate_generators", "generator_value", "power_sum",
    "Partition", "Permutation", "character_mn", "rep_matrix", "syt_enumerate",
    "dump_problem", "load_problem", "read_certificate", "write_certificate",
    "Certificate", "Status", "Verdict", "dimension_free_flag", "refute", "verify_certificate",
]
