#pragma once

#include "cellres/geo.hpp"
#include "cellres/ingest.hpp"
#include "cellres/radio.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace cellres {

enum class AssociationMode { single_operator, roaming };

std::string_view to_string(AssociationMode mode);

// Cells a user may attach to: every active cell under roaming, only the subscribed
// operator's active cells otherwise. Indices into `cells`, ascending.
std::vector<std::uint32_t> candidate_cells(const User& user, std::span<const Cell> cells,
                                           const std::vector<bool>& active, AssociationMode mode);

struct CandidateLink {
    std::uint32_t cell_index = 0;
    double sinr = 0.0;
};

// Association matrix X in sparse form. Vectors indexed by user position use the
// order of the span passed to associate(); `load` is indexed like the cell list.
struct AssociationState {
    std::vector<std::optional<std::uint32_t>> serving;
    std::vector<double> sinr;
    std::vector<std::uint32_t> load;
    std::vector<std::vector<CandidateLink>> candidates;
    std::vector<std::size_t> order;

    std::size_t assigned_count() const noexcept;
};

// Uniformly random processing order driven only by (seed, user id), so any subset of
// users is visited in the same relative order.
std::vector<std::size_t> association_order(std::span<const User> users, std::uint64_t seed);

// Greedy association. Users are visited in association_order; each joins the candidate
// cell with SINR >= gamma_min maximising SINR / (load + 1), lowest cell id on ties.
// Candidates are pruned to r_max around the user.
AssociationState associate(std::span<const User> users, const RadioEnvironment& radio,
                           AssociationMode mode, double gamma_min_linear, std::uint64_t order_seed);

} // namespace cellres
