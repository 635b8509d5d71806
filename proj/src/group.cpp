#include "snowbranch/group.hpp"

#include <algorithm>
#include <bit>
#include <set>

#include <fmt/format.h>

#include "snowbranch/errors.hpp"

namespace snowbranch {

std::string GroupElement::name() const {
  std::string body;
  if (r_ == 3 && s_) {
    body = "tau";
  } else {
    if (r_ == 1) body = "rho";
    if (r_ > 1) body = fmt::format("rho^{}", r_);
    if (s_) body += body.empty() ? "sigma" : " sigma";
  }
  if (body.empty()) return negative_ ? "-1" : "1";
  return negative_ ? "-" + body : body;
}

std::array<GroupElement, kGroupOrder> all_elements() {
  std::array<GroupElement, kGroupOrder> out{};
  for (int i = 0; i < kGroupOrder; ++i) out[static_cast<std::size_t>(i)] = GroupElement::from_index(i);
  return out;
}

Subgroup Subgroup::generated_by(std::span<const GroupElement> gens) {
  std::uint32_t bits = 1u;
  std::vector<GroupElement> frontier{GroupElement::identity()};
  while (!frontier.empty()) {
    std::vector<GroupElement> next;
    for (auto x : frontier) {
      for (auto g : gens) {
        const auto y = x * g;
        const auto bit = 1u << y.index();
        if (!(bits & bit)) {
          bits |= bit;
          next.push_back(y);
        }
      }
    }
    frontier = std::move(next);
  }
  return Subgroup{bits};
}

Subgroup Subgroup::generated_by(std::initializer_list<GroupElement> gens) {
  return generated_by(std::span<const GroupElement>(gens.begin(), gens.size()));
}

int Subgroup::order() const { return std::popcount(bits_); }

std::vector<GroupElement> Subgroup::members() const {
  std::vector<GroupElement> out;
  for (int i = 0; i < kGroupOrder; ++i)
    if ((bits_ >> i) & 1u) out.push_back(GroupElement::from_index(i));
  return out;
}

bool Subgroup::is_subgroup() const {
  if (!(bits_ & 1u)) return false;
  const auto m = members();
  for (auto a : m)
    for (auto b : m)
      if (!contains(a * b.inverse())) return false;
  return true;
}

Subgroup Subgroup::conjugate_by(GroupElement g) const {
  std::uint32_t bits = 0;
  const auto gi = g.inverse();
  for (auto x : members()) bits |= 1u << (g * x * gi).index();
  return Subgroup{bits};
}

bool Subgroup::is_normal_in(Subgroup parent) const {
  if (!is_subset_of(parent)) return false;
  for (auto g : parent.members())
    if (conjugate_by(g) != *this) return false;
  return true;
}

std::string Subgroup::hex() const { return fmt::format("{:06x}", bits_); }

std::vector<Subgroup> enumerate_subgroups() {
  std::set<std::uint32_t> found;
  for (auto g : all_elements()) found.insert(Subgroup::generated_by({g}).bits());
  // Every subgroup is the join of its cyclic subgroups, so closing the set
  // under pairwise joins reaches all of them.
  bool grew = true;
  while (grew) {
    grew = false;
    const std::vector<std::uint32_t> snapshot(found.begin(), found.end());
    for (std::size_t i = 0; i < snapshot.size(); ++i) {
      for (std::size_t j = i + 1; j < snapshot.size(); ++j) {
        const auto gens = Subgroup{snapshot[i] | snapshot[j]}.members();
        const auto joined = Subgroup::generated_by(gens).bits();
        if (found.insert(joined).second) grew = true;
      }
    }
  }
  std::vector<Subgroup> out;
  for (auto b : found) out.emplace_back(b);
  std::sort(out.begin(), out.end(), [](Subgroup a, Subgroup b) {
    if (a.order() != b.order()) return a.order() < b.order();
    return a.bits() < b.bits();
  });
  return out;
}

bool is_function_space_isotropy(Subgroup s) {
  return !s.contains(GroupElement::minus_one()) || s == Subgroup::whole();
}

std::vector<Subgroup> function_space_isotropy_subgroups() {
  std::vector<Subgroup> out;
  for (auto s : enumerate_subgroups())
    if (is_function_space_isotropy(s)) out.push_back(s);
  return out;
}

Subgroup normalizer(Subgroup sigma, Subgroup gamma) {
  if (!sigma.is_subset_of(gamma))
    throw ConsistencyError(fmt::format("normalizer: {} is not contained in {}", sigma.hex(), gamma.hex()));
  std::uint32_t bits = 0;
  for (auto g : gamma.members())
    if (sigma.conjugate_by(g) == sigma) bits |= 1u << g.index();
  return Subgroup{bits};
}

std::vector<std::vector<Subgroup>> conjugacy_partition(std::span<const Subgroup> subs) {
  std::vector<std::vector<Subgroup>> classes;
  std::set<std::uint32_t> seen;
  for (auto s : subs) {
    if (seen.count(s.bits())) continue;
    std::set<Subgroup> cls;
    for (auto g : all_elements()) cls.insert(s.conjugate_by(g));
    for (auto c : cls) seen.insert(c.bits());
    classes.emplace_back(cls.begin(), cls.end());
  }
  return classes;
}

std::vector<RepresentativeSpec> conventional_representatives() {
  const auto r = GroupElement::rho();
  const auto s = GroupElement::sigma();
  const auto t = GroupElement::tau();
  const auto m = GroupElement::minus_one();
  const auto r2 = r.pow(2);
  const auto r3 = r.pow(3);
  return {
      {"<rho, sigma, tau, -1>", {r, s, t, m}},
      {"<rho, sigma, tau>", {r, s, t}},
      {"<rho, -sigma, -tau>", {r, -s, -t}},
      {"<-rho, sigma, -tau>", {-r, s, -t}},
      {"<-rho, -sigma, tau>", {-r, -s, t}},
      {"<sigma, tau>", {s, t}},
      {"<-sigma, -tau>", {-s, -t}},
      {"<sigma, -tau>", {s, -t}},
      {"<-sigma, tau>", {-s, t}},
      {"<rho^2, sigma>", {r2, s}},
      {"<rho^2, tau>", {r2, t}},
      {"<rho^2, -tau>", {r2, -t}},
      {"<rho^2, -sigma>", {r2, -s}},
      {"<rho>", {r}},
      {"<-rho>", {-r}},
      {"<sigma>", {s}},
      {"<tau>", {t}},
      {"<-tau>", {-t}},
      {"<-sigma>", {-s}},
      {"<rho^3>", {r3}},
      {"<-rho^3>", {-r3}},
      {"<rho^2>", {r2}},
      {"<1>", {}},
  };
}

SymmetryTables::SymmetryTables() : subgroups_(enumerate_subgroups()) {
  std::vector<Subgroup> iso;
  for (auto s : subgroups_)
    if (is_function_space_isotropy(s)) iso.push_back(s);
  const auto classes = conjugacy_partition(iso);

  const auto reps = conventional_representatives();
  std::vector<int> class_used(classes.size(), -1);
  for (std::size_t i = 0; i < reps.size(); ++i) {
    const auto rep = Subgroup::generated_by(reps[i].generators);
    int hit = -1;
    for (std::size_t c = 0; c < classes.size(); ++c)
      if (std::find(classes[c].begin(), classes[c].end(), rep) != classes[c].end()) hit = static_cast<int>(c);
    if (hit < 0 || class_used[static_cast<std::size_t>(hit)] >= 0)
      throw ConsistencyError(fmt::format("representative {} does not match a unique isotropy class", reps[i].name));
    class_used[static_cast<std::size_t>(hit)] = static_cast<int>(i);
    types_.push_back({static_cast<int>(i), rep, reps[i].name, classes[static_cast<std::size_t>(hit)]});
  }
  if (types_.size() != classes.size())
    throw ConsistencyError(fmt::format("{} isotropy classes but {} representatives", classes.size(), types_.size()));

  for (const auto& t : types_)
    for (auto m : t.class_members) lookup_.emplace_back(m.bits(), t.index);
  std::sort(lookup_.begin(), lookup_.end());
}

int SymmetryTables::type_of(Subgroup s) const {
  auto it = std::lower_bound(lookup_.begin(), lookup_.end(), std::make_pair(s.bits(), -1));
  if (it == lookup_.end() || it->first != s.bits()) return -1;
  return it->second;
}

GroupElement SymmetryTables::conjugator_to_representative(Subgroup s) const {
  const int t = type_of(s);
  if (t < 0) throw ConsistencyError(fmt::format("subgroup {} is not an isotropy subgroup", s.hex()));
  const auto rep = types_[static_cast<std::size_t>(t)].representative;
  for (auto g : all_elements())
    if (s.conjugate_by(g) == rep) return g;
  throw ConsistencyError("conjugator not found");
}

const SymmetryTables& symmetry_tables() {
  static const SymmetryTables tables;
  return tables;
}

}  // namespace snowbranch
