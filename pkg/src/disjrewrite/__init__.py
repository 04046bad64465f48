"""UCQ rewriting with disjunctive existential rules."""
from .chase import (ENTAILED, NOT_ENTAILED, UNKNOWN, ChaseBudget, ChaseVerdict, DerivationTree, Trigger,
                    apply_trigger, chase_entails, expand_chase, find_triggers)
from .homomorphism import (cover, cq_entails, cq_equivalent, homomorphism, homomorphisms, isomorphic,
                           ucq_entails, ucq_equivalent)
from .model import (CQ, UCQ, Atom, Constant, DisjunctiveRule, Mapping, Predicate, RuleSet, Substitution,
                    Variable, atom, canonical_cq, fresh_variable, rule)
from .partition import TermPartition, associated_substitution, join_partitions
from .rewriting import (BUDGET_EXHAUSTED, COMPLETE, Budget, DisjunctivePieceUnifier, PieceUnifier,
                        RewritingOutcome, apply_beta, enumerate_disjunctive_piece_unifiers,
                        enumerate_piece_unifiers, one_step_rewritings, rewrite, s_rewrite, w_iterates,
                        w_step)
from .textio import Document, ParseError, export_json, parse, serialize, serialize_document

__version__ = "0.1.0"

__all__ = ["ENTAILED", "NOT_ENTAILED", "UNKNOWN", "ChaseBudget", "ChaseVerdict", "DerivationTree",
           "Trigger", "apply_trigger", "chase_entails", "expand_chase", "find_triggers", "cover",
           "cq_entails", "cq_equivalent", "homomorphism", "homomorphisms", "isomorphic",
           "ucq_entails", "ucq_equivalent", "CQ", "UCQ", "Atom", "Constant", "DisjunctiveRule",
           "Mapping", "Predicate", "RuleSet", "Substitution", "Variable", "atom", "canonical_cq",
           "fresh_variable", "rule", "TermPartition", "associated_substitution", "join_partitions",
           "BUDGET_EXHAUSTED", "COMPLETE", "Budget", "DisjunctivePieceUnifier", "PieceUnifier",
           "RewritingOutcome", "apply_beta", "enumerate_disjunctive_piece_unifiers",
           "enumerate_piece_unifiers", "one_step_rewritings", "rewrite", "s_rewrite", "w_iterates",
           "w_step", "Document", "ParseError", "export_json", "parse", "serialize",
           "serialize_document"]
