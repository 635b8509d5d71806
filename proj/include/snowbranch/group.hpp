#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace snowbranch {

inline constexpr int kGroupOrder = 24;

/// Element of D6 x Z2 written as rho^r sigma^s with a sign for the Z2 factor.
///
/// Multiplication realizes rho^6 = sigma^2 = 1 and sigma rho = rho^5 sigma; the
/// sign multiplies independently. Elements are enumerated with r fastest, then
/// s, then the sign, so index() runs 0..23 and every bitset in this library
/// uses that layout.
class GroupElement {
 public:
  constexpr GroupElement() = default;
  constexpr GroupElement(int r, bool s, int sign = +1)
      : r_(((r % 6) + 6) % 6), s_(s), negative_(sign < 0) {}

  static constexpr GroupElement identity() { return {}; }
  static constexpr GroupElement rho() { return {1, false}; }
  static constexpr GroupElement sigma() { return {0, true}; }
  /// tau = rho^3 sigma, the reflection across the x-axis.
  static constexpr GroupElement tau() { return {3, true}; }
  static constexpr GroupElement minus_one() { return {0, false, -1}; }

  static constexpr GroupElement from_index(int idx) {
    return {idx % 6, ((idx / 6) % 2) != 0, idx >= 12 ? -1 : +1};
  }

  constexpr int index() const { return r_ + 6 * (s_ ? 1 : 0) + (negative_ ? 12 : 0); }
  constexpr int rotation() const { return r_; }
  constexpr bool reflection() const { return s_; }
  constexpr int sign() const { return negative_ ? -1 : +1; }
  constexpr bool in_d6() const { return !negative_; }
  constexpr GroupElement d6_part() const { return {r_, s_, +1}; }

  constexpr GroupElement operator*(GroupElement o) const {
    // (rho^a sigma^s)(rho^b sigma^t) = rho^(a + (-1)^s b) sigma^(s+t)
    const int r = s_ ? r_ - o.r_ : r_ + o.r_;
    return {r, s_ != o.s_, (negative_ != o.negative_) ? -1 : +1};
  }
  constexpr GroupElement operator-() const { return {r_, s_, negative_ ? +1 : -1}; }

  constexpr GroupElement inverse() const {
    return s_ ? *this : GroupElement{-r_, false, sign()};
  }

  constexpr GroupElement pow(int n) const {
    GroupElement out;
    for (int k = 0; k < n; ++k) out = out * *this;
    return out;
  }

  /// Human-readable name such as "-rho^2 sigma" or "tau".
  std::string name() const;

  friend constexpr bool operator==(GroupElement, GroupElement) = default;

 private:
  int r_ = 0;
  bool s_ = false;
  bool negative_ = false;
};

/// All 24 elements in index order.
std::array<GroupElement, kGroupOrder> all_elements();

/// A subset of D6 x Z2 stored as a 24-bit membership set.
class Subgroup {
 public:
  constexpr Subgroup() = default;
  constexpr explicit Subgroup(std::uint32_t bits) : bits_(bits & 0xFFFFFFu) {}

  /// Smallest subgroup containing the given elements.
  static Subgroup generated_by(std::span<const GroupElement> gens);
  static Subgroup generated_by(std::initializer_list<GroupElement> gens);
  static Subgroup whole() { return Subgroup{0xFFFFFFu}; }
  static Subgroup trivial() { return Subgroup{1u}; }
  static Subgroup d6() { return Subgroup{0xFFFu}; }

  constexpr std::uint32_t bits() const { return bits_; }
  constexpr bool contains(GroupElement g) const { return (bits_ >> g.index()) & 1u; }
  int order() const;
  std::vector<GroupElement> members() const;

  bool is_subgroup() const;
  constexpr bool is_subset_of(Subgroup o) const { return (bits_ & ~o.bits_) == 0; }
  constexpr Subgroup intersect(Subgroup o) const { return Subgroup{bits_ & o.bits_}; }
  Subgroup conjugate_by(GroupElement g) const;  // g S g^-1
  bool is_normal_in(Subgroup parent) const;

  std::string hex() const;

  friend constexpr bool operator==(Subgroup, Subgroup) = default;
  friend constexpr auto operator<=>(Subgroup a, Subgroup b) { return a.bits_ <=> b.bits_; }

 private:
  std::uint32_t bits_ = 0;
};

/// Every subgroup of D6 x Z2, each exactly once, sorted by (order, bits).
std::vector<Subgroup> enumerate_subgroups();

/// The function-space isotropy rule: Sigma is an isotropy subgroup iff -1 is
/// not in Sigma or Sigma is the whole group.
bool is_function_space_isotropy(Subgroup s);
std::vector<Subgroup> function_space_isotropy_subgroups();

/// Largest subgroup of gamma in which sigma is normal. Throws if sigma is not
/// contained in gamma.
Subgroup normalizer(Subgroup sigma, Subgroup gamma);

/// Partition of a conjugation-closed family into D6 x Z2 conjugacy classes.
/// Classes are returned in order of first appearance; members sorted.
std::vector<std::vector<Subgroup>> conjugacy_partition(std::span<const Subgroup> subs);

struct SymmetryType {
  int index = 0;
  Subgroup representative;
  std::string name;  // e.g. "<rho^2, -tau>"
  std::vector<Subgroup> class_members;
};

/// The 23 symmetry types of the function-space action, indexed to match the
/// conventional table Gamma_0 .. Gamma_22. Construction throws if the
/// conventional representatives do not biject onto the computed classes.
class SymmetryTables {
 public:
  SymmetryTables();

  const std::vector<SymmetryType>& types() const { return types_; }
  const SymmetryType& type(int i) const { return types_.at(static_cast<std::size_t>(i)); }
  int size() const { return static_cast<int>(types_.size()); }

  /// Symmetry type index of an isotropy subgroup; -1 if not an isotropy subgroup.
  int type_of(Subgroup s) const;
  /// Some g with g s g^-1 equal to the representative of s's type.
  GroupElement conjugator_to_representative(Subgroup s) const;

  const std::vector<Subgroup>& all_subgroups() const { return subgroups_; }

 private:
  std::vector<Subgroup> subgroups_;
  std::vector<SymmetryType> types_;
  std::vector<std::pair<std::uint32_t, int>> lookup_;  // sorted by bits
};

/// Process-wide tables, built on first use.
const SymmetryTables& symmetry_tables();

/// Generator lists of the 23 conventional representatives, as (name, generators).
struct RepresentativeSpec {
  const char* name;
  std::vector<GroupElement> generators;
};
std::vector<RepresentativeSpec> conventional_representatives();

}  // namespace snowbranch
