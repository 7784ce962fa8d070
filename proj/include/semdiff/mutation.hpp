#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "semdiff/core_model.hpp"

namespace semdiff {

/// First-order mutation operators. Rewrite tables:
///   AOR  + -> -, *   - -> +   * -> /   / -> *   % -> *
///   AOD  unary +/- dropped; binary arithmetic reduced to either operand
///   ROR  < <-> >=, > <-> <=, == <-> !=
///   COD  `not` dropped
///   LOR  and <-> or
///   ZIL  for-loop iterable replaced by []
///   CRP  integer n -> n+1, non-empty string -> "", True <-> False
///   BCR  break <-> continue
///   EXS  simple statement replaced by `pass` (never a sole `return`)
///   SIR  one slice bound removed
enum class MutationOperator { AOR, AOD, ROR, COD, LOR, ZIL, CRP, BCR, EXS, SIR };

inline constexpr std::size_t kOperatorCount = 10;

std::string_view operator_code(MutationOperator op);
std::string_view operator_description(MutationOperator op);
MutationOperator operator_from_code(std::string_view code);
std::set<MutationOperator> all_operators();

/// Parses a comma-separated list such as "AOR,ROR". Throws ConfigError on
/// unknown codes.
std::set<MutationOperator> parse_operator_list(std::string_view list);

struct MutationSite {
  MutationOperator op;
  std::size_t begin;  // byte offsets into the source
  std::size_t end;
  std::string original;
  std::string replacement;

  bool operator==(const MutationSite&) const = default;
};

/// Every applicable site, ordered by start offset then operator code.
/// Throws ParseError.
std::vector<MutationSite> enumerate_sites(std::string_view code);

/// Splices the site into the code. Throws StaleSiteError when the offsets or
/// fragment no longer match.
std::string apply_mutation(std::string_view code, const MutationSite& site);

/// "ROR@57-59"
std::string site_provenance(const MutationSite& site);

struct MutationLimits {
  std::size_t max_mutants = 100;
  std::set<MutationOperator> operators = all_operators();
};

/// Applies every enabled site, drops mutants that do not parse or repeat an
/// earlier mutant, and truncates to `max_mutants` in enumeration order.
std::vector<VariantRecord> generate_mutants(std::string_view code,
                                            const MutationLimits& limits,
                                            std::string_view task_id = {});

}  // namespace semdiff
