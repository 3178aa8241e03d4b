#ifndef QFA_CONSTRUCTIONS_HPP
#define QFA_CONSTRUCTIONS_HPP

#include <map>
#include <optional>
#include <string>
#include <utility>

#include "qfa/qfa_core.hpp"

namespace qfa {

// Symbol-to-word map over the target automaton's alphabet; images may be
// empty, the end-marker is excluded from domain and range.
using Homomorphism = std::map<char, std::string>;

struct CertifiedMm {
    MmQfa aut;
    Certificate cert;
};

// Exchanges accept and reject states; p'_acc(w) = p_rej(w).
MmQfa mm_complement(const MmQfa& m);
Certificate mm_complement(const Certificate& c);

// Accepts h^{-1}(L): each transition becomes the product of shifted
// sub-transitions, with the halting states replicated once per sub-step so
// measured mass never re-enters the live computation.
MmQfa mm_inverse_hom(const MmQfa& m, const Homomorphism& h);

// Folds a designated left-end-marker matrix into the per-symbol matrices;
// word probabilities match the two-marker automaton.
MoQfa mo_strip_left_endmarker(const MoQfa& m, const CMatrix& cent);
MmQfa mm_strip_left_endmarker(const MmQfa& m, const CMatrix& cent);

enum class QuotientSide { Left, Right };

// Left: acceptance of the result on w equals m's on uw.  Right: equals m's
// on wu, implemented by pipelining u into the end-marker transition with
// halting-set shifting.
MmQfa word_quotient(const MmQfa& m, const std::string& u, QuotientSide side);

// Pairwise product automaton; requires both certificates end-decisive.
// p''_acc(w) = p1_acc(w) * p2_acc(w).
CertifiedMm mm_tensor(const CertifiedMm& m1, const CertifiedMm& m2);

// k-fold tensor power.
CertifiedMm mm_power(const CertifiedMm& m, int k);

// Direct sum of the s-th and t-th tensor powers with the initial mass split
// evenly; p'' = (p1^{(s)} + p2^{(t)})/2.  Powers are auto-selected when not
// given; throws if no pair up to 16 separates the bounds.  `chosen` reports
// the powers used.
CertifiedMm mm_union(const CertifiedMm& m1, const CertifiedMm& m2,
                     std::optional<std::pair<int, int>> powers = std::nullopt,
                     std::pair<int, int>* chosen = nullptr);

// Bounded-error acceptor for the complement of a language accepted with
// bounded positive one-sided error and positive amplitude.
CertifiedMm mm_complement_one_sided(const CertifiedMm& m);

// Intersection of a bounded-error language with a one-sided-positive one;
// m1 is raised to the least power that separates the bounds (cap 16).
CertifiedMm mm_intersect(const CertifiedMm& m1, const CertifiedMm& m2, int* chosen_k = nullptr);

// Relabels states; transition matrices are conjugated by the permutation.
// to_new[old] = new index.
MmQfa renumber_states(const MmQfa& m, const std::vector<int>& to_new);

// Permutation moving all non-halting states in front (stable order).
std::vector<int> nonhalting_first_order(const MmQfa& m);

}  // namespace qfa

#endif
