"""Finite universal algebra workbench: implicit operations, dominions and
Beth companions checked on finite algebras."""

__version__ = "0.1.0"

from .algebra import (AlgebraError, FiniteAlgebra, Homomorphism, Signature, enumerate_homs,
                      is_homomorphism, is_isomorphic, product, quotient, sg, subalgebra, subuniverses,
                      validate_algebra)
from .classops import ClassSpec, membership, rsi_members, subdirect_decomposition
from .congruence import Congruence, cg, check_congruence_equation, con, con_k, is_rfsi, is_rsi
from .dominion import check_ses, dominion, zigzag_membership
from .expansion import ExpansionOp, ExpansionSpec, beth_primal_witness, expand, expand_class
from .formula import check_functional, classify, eval_formula, implicit_table, parse
from .termcond import TermCondition, is_primal, search_interpolant_term, term_condition_search
from .verdict import BudgetExhausted, SearchBudget, Verdict
