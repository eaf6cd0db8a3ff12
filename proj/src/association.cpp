#include "cellres/association.hpp"

#include "cellres/seeding.hpp"

#include <algorithm>
#include <numeric>

namespace cellres {

std::string_view to_string(AssociationMode mode)
{
    return mode == AssociationMode::roaming ? "roaming" : "per-operator";
}

std::vector<std::uint32_t> candidate_cells(const User& user, std::span<const Cell> cells,
                                           const std::vector<bool>& active, AssociationMode mode)
{
    std::vector<std::uint32_t> out;
    for (std::uint32_t j = 0; j < cells.size(); ++j) {
        if (!active.at(j)) {
            continue;
        }
        if (mode == AssociationMode::single_operator &&
            (!user.subscription || *user.subscription != cells[j].operator_id)) {
            continue;
        }
        out.push_back(j);
    }
    return out;
}

std::size_t AssociationState::assigned_count() const noexcept
{
    return static_cast<std::size_t>(
        std::count_if(serving.begin(), serving.end(), [](const auto& s) { return s.has_value(); }));
}

std::vector<std::size_t> association_order(std::span<const User> users, std::uint64_t seed)
{
    std::vector<std::pair<double, std::size_t>> keyed;
    keyed.reserve(users.size());
    for (std::size_t i = 0; i < users.size(); ++i) {
        keyed.emplace_back(hashed_uniform(seed, users[i].id, 0), i);
    }
    std::sort(keyed.begin(), keyed.end(), [&](const auto& a, const auto& b) {
        if (a.first != b.first) {
            return a.first < b.first;
        }
        return users[a.second].id < users[b.second].id;
    });
    std::vector<std::size_t> order;
    order.reserve(keyed.size());
    for (const auto& [key, index] : keyed) {
        order.push_back(index);
    }
    return order;
}

AssociationState associate(std::span<const User> users, const RadioEnvironment& radio,
                           AssociationMode mode, double gamma_min_linear, std::uint64_t order_seed)
{
    const auto cells = radio.cells();
    AssociationState state;
    state.serving.assign(users.size(), std::nullopt);
    state.sinr.assign(users.size(), 0.0);
    state.load.assign(cells.size(), 0);
    state.candidates.resize(users.size());
    state.order = association_order(users, order_seed);

    for (std::size_t u : state.order) {
        const User& user = users[u];
        auto nearby = radio.active_within(user.position, radio.params().r_max_m);
        if (mode == AssociationMode::single_operator) {
            std::erase_if(nearby, [&](std::uint32_t j) {
                return !user.subscription || *user.subscription != cells[j].operator_id;
            });
        }
        const auto budgets = radio.links(user.id, user.position, nearby);

        auto& cands = state.candidates[u];
        cands.reserve(budgets.size());
        std::optional<std::uint32_t> best;
        double best_score = 0.0;
        double best_gamma = 0.0;
        for (std::size_t k = 0; k < budgets.size(); ++k) {
            const std::uint32_t j = nearby[k];
            const double gamma = budgets[k].sinr;
            cands.push_back({j, gamma});
            if (gamma < gamma_min_linear) {
                continue;
            }
            const double score = gamma / (static_cast<double>(state.load[j]) + 1.0);
            if (!best || score > best_score) {
                best = j;
                best_score = score;
                best_gamma = gamma;
            }
        }
        if (best) {
            state.serving[u] = best;
            state.sinr[u] = best_gamma;
            ++state.load[*best];
        }
    }
    return state;
}

} // namespace cellres
