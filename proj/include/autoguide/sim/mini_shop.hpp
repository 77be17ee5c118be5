// Copyright 2026 The autoguide Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// MiniShop: a three-page shopping environment (search, results, product) scored with
// the WebShop purchase reward.

#include <algorithm>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "autoguide/error.hpp"
#include "autoguide/sim/environment.hpp"
#include "autoguide/text.hpp"

namespace autoguide::sim {

struct Product {
    std::string id;
    std::string type;
    double price = 0.0;
    std::set<std::string> attributes;
    std::set<std::string> options;

    bool operator==(const Product&) const = default;
};

struct ShopTarget {
    std::string type;
    double price_cap = 0.0;
    std::set<std::string> attributes;
    std::set<std::string> options;

    bool operator==(const ShopTarget&) const = default;
};

/// Exact numerator/denominator of the purchase reward.
struct RewardFraction {
    long long numerator = 0;
    long long denominator = 1;

    double value() const { return static_cast<double>(numerator) / static_cast<double>(denominator); }
};

inline std::size_t intersection_size(const std::set<std::string>& a, const std::set<std::string>& b) {
    std::size_t n = 0;
    for (const auto& x : a) n += b.count(x);
    return n;
}

/// r = r_type * (|U_att ∩ Y_att| + |U_opt ∩ Y_opt| + 1[y_price <= u_price]) / (|U_att| + |U_opt| + 1)
inline RewardFraction webshop_reward_terms(const Product& purchased, const ShopTarget& target) {
    const auto den = static_cast<long long>(target.attributes.size() + target.options.size() + 1);
    if (purchased.type != target.type) return {0, den};
    const auto num = static_cast<long long>(intersection_size(target.attributes, purchased.attributes) +
                                            intersection_size(target.options, purchased.options) +
                                            (purchased.price <= target.price_cap ? 1 : 0));
    return {num, den};
}

inline double reward_webshop(const Product& purchased, const ShopTarget& target) {
    return webshop_reward_terms(purchased, target).value();
}

struct MiniShopTask {
    std::string task_id;
    std::string instruction;
    ShopTarget target;
    std::vector<Product> catalog;

    const Product* product(std::string_view id) const {
        for (const auto& p : catalog)
            if (p.id == id) return &p;
        return nullptr;
    }

    bool operator==(const MiniShopTask&) const = default;
};

/// Index of the unique reward-maximizing product; throws ConfigError if not unique.
inline std::size_t optimal_product(const MiniShopTask& task) {
    std::size_t best = 0;
    std::size_t ties = 0;
    for (std::size_t i = 0; i < task.catalog.size(); ++i) {
        const auto r = webshop_reward_terms(task.catalog[i], task.target);
        const auto b = webshop_reward_terms(task.catalog[best], task.target);
        // Same denominator for every product of a task.
        if (r.numerator > b.numerator) {
            best = i;
            ties = 0;
        } else if (i != best && r.numerator == b.numerator) {
            ++ties;
        }
    }
    if (ties) throw ConfigError(task.task_id + ": more than one product maximizes the reward");
    return best;
}

inline void validate(const MiniShopTask& task) {
    if (task.catalog.size() < 3 || task.catalog.size() > 10)
        throw ConfigError(task.task_id + ": catalog size must be in [3, 10]");
    std::set<std::string> ids;
    for (const auto& p : task.catalog)
        if (!ids.insert(p.id).second) throw ConfigError(task.task_id + ": duplicate product id " + p.id);
    optimal_product(task);
}

inline std::string shop_action_click(std::string_view label) { return "click[" + std::string(label) + "]"; }

inline std::string format_price(double p) { return "$" + text::format_number(p); }

class MiniShopEnv final : public Environment {
public:
    explicit MiniShopEnv(MiniShopTask task) : task_(std::move(task)) {
        validate(task_);
        reset();
    }

    std::string reset(std::uint64_t seed = 0) override {
        order_.resize(task_.catalog.size());
        std::iota(order_.begin(), order_.end(), std::size_t{0});
        if (seed != 0) {
            Rng rng(seed);
            rng.shuffle(order_);
        }
        page_ = Page::search;
        done_ = false;
        total_ = 0.0;
        viewing_ = 0;
        query_.clear();
        observation_ = search_page();
        return observation_;
    }

    StepResult step(std::string_view raw) override {
        if (done_) throw StepAfterDone("step called after the episode ended (task " + task_.task_id + ")");
        const auto action = text::collapse_whitespace(raw);
        auto arg = [&](std::string_view verb) -> std::optional<std::string> {
            const auto open = std::string(verb) + "[";
            if (action.size() > open.size() && action.rfind(open, 0) == 0 && action.back() == ']')
                return action.substr(open.size(), action.size() - open.size() - 1);
            return std::nullopt;
        };

        if (arg("think")) return stay("OK.");
        if (auto q = arg("search"); q && page_ == Page::search) {
            query_ = *q;
            page_ = Page::results;
            return stay(results_page());
        }
        if (auto label = arg("click")) {
            if (*label == "Back to Search" && page_ != Page::search) {
                page_ = Page::search;
                return stay(search_page());
            }
            if (page_ == Page::results) {
                for (std::size_t i = 0; i < task_.catalog.size(); ++i) {
                    if (task_.catalog[i].id == *label) {
                        viewing_ = i;
                        page_ = Page::product;
                        return stay(product_page());
                    }
                }
            }
            if (page_ == Page::product && *label == "Buy Now") {
                const auto& p = task_.catalog[viewing_];
                const double r = reward_webshop(p, task_.target);
                done_ = true;
                total_ += r;
                purchased_ = p.id;
                observation_ = "You bought " + p.id + ". Reward: " + text::format_number(r) + ".";
                return {observation_, r, true};
            }
        }
        return stay(std::string(kInvalidAction));
    }

    const std::string& observation() const override { return observation_; }
    bool done() const override { return done_; }
    double accumulated_reward() const override { return total_; }
    // A purchase counts as a success only at full reward.
    bool success() const override { return done_ && total_ >= 1.0; }
    const std::string& task_id() const override { return task_.task_id; }
    const std::string& instruction() const override { return task_.instruction; }
    const MiniShopTask& task() const noexcept { return task_; }
    const std::string& purchased() const noexcept { return purchased_; }

private:
    enum class Page { search, results, product };

    StepResult stay(std::string obs) {
        observation_ = std::move(obs);
        return {observation_, 0.0, false};
    }

    std::string search_page() const {
        return "Search page. Instruction: " + task_.instruction + " Available actions: search[<query>].";
    }

    std::string results_page() const {
        std::string out = "Results for \"" + query_ + "\":";
        std::vector<std::string> acts;
        for (auto i : order_) {
            const auto& p = task_.catalog[i];
            out += " [" + p.id + "] " + p.type + " " + format_price(p.price) + ";";
            acts.push_back(shop_action_click(p.id));
        }
        acts.push_back(shop_action_click("Back to Search"));
        return out + " Available actions: " + text::join(acts, ", ") + ".";
    }

    std::string product_page() const {
        const auto& p = task_.catalog[viewing_];
        std::vector<std::string> attrs(p.attributes.begin(), p.attributes.end());
        std::vector<std::string> opts(p.options.begin(), p.options.end());
        return "Product " + p.id + ": " + p.type + ", price " + format_price(p.price) +
               ". Attributes: " + text::join(attrs, ", ") + ". Options: " + text::join(opts, ", ") +
               ". Available actions: click[Buy Now], click[Back to Search].";
    }

    MiniShopTask task_;
    std::vector<std::size_t> order_;
    Page page_ = Page::search;
    bool done_ = false;
    double total_ = 0.0;
    std::size_t viewing_ = 0;
    std::string query_;
    std::string purchased_;
    std::string observation_;
};

/// Random task whose catalog holds exactly one full-reward product and 2-9 worse ones.
inline MiniShopTask random_mini_shop_task(Rng& rng, std::string task_id) {
    static const std::vector<std::string> types = {"shampoo", "t-shirt", "headphones", "coffee", "backpack"};
    static const std::vector<std::string> attributes = {"organic", "waterproof", "lightweight", "vegan",
                                                        "wireless", "long lasting", "recycled"};
    static const std::vector<std::string> options = {"small", "medium", "large", "black", "white", "blue"};

    MiniShopTask task;
    task.task_id = std::move(task_id);
    auto& target = task.target;
    target.type = rng.pick(types);
    auto attr_pool = attributes;
    rng.shuffle(attr_pool);
    target.attributes = {attr_pool[0], attr_pool[1]};
    auto opt_pool = options;
    rng.shuffle(opt_pool);
    target.options = {opt_pool[0]};
    target.price_cap = 20.0 + 5.0 * static_cast<double>(rng.index(7));

    task.instruction = "I need a " + target.type + " that is " + attr_pool[0] + " and " + attr_pool[1] + ", in " +
                       opt_pool[0] + ", priced lower than " + format_price(target.price_cap) + ".";

    Product best{"", target.type, target.price_cap - 1.0 - 0.5 * static_cast<double>(rng.index(10)),
                 target.attributes, target.options};
    task.catalog.push_back(best);

    const auto others = 2 + rng.index(8);
    for (std::size_t i = 0; i < others; ++i) {
        Product p = best;
        switch (rng.index(4)) {
            case 0: {  // wrong type
                std::string t;
                do t = rng.pick(types);
                while (t == target.type);
                p.type = t;
                break;
            }
            case 1:  // one attribute replaced by a non-target one
                p.attributes.erase(p.attributes.begin());
                p.attributes.insert(attr_pool[2 + rng.index(attr_pool.size() - 2)]);
                break;
            case 2:  // over budget
                p.price = target.price_cap + 0.5 + static_cast<double>(rng.index(20));
                break;
            default:  // wrong option
                p.options = {opt_pool[1 + rng.index(opt_pool.size() - 1)]};
                break;
        }
        task.catalog.push_back(std::move(p));
    }
    rng.shuffle(task.catalog);
    for (std::size_t i = 0; i < task.catalog.size(); ++i) task.catalog[i].id = "B" + std::to_string(100 + i);
    validate(task);
    return task;
}

inline nlohmann::json to_json(const Product& p) {
    return {{"id", p.id}, {"type", p.type}, {"price", p.price}, {"attributes", p.attributes}, {"options", p.options}};
}

inline nlohmann::json to_json(const MiniShopTask& t) {
    nlohmann::json catalog = nlohmann::json::array();
    for (const auto& p : t.catalog) catalog.push_back(to_json(p));
    return {{"task_id", t.task_id},
            {"instruction", t.instruction},
            {"target",
             {{"type", t.target.type},
              {"price_cap", t.target.price_cap},
              {"attributes", t.target.attributes},
              {"options", t.target.options}}},
            {"catalog", std::move(catalog)}};
}

inline MiniShopTask mini_shop_task_from_json(const nlohmann::json& j) {
    MiniShopTask t;
    t.task_id = j.at("task_id").get<std::string>();
    t.instruction = j.value("instruction", std::string{});
    const auto& jt = j.at("target");
    t.target = {jt.at("type").get<std::string>(), jt.at("price_cap").get<double>(),
                jt.at("attributes").get<std::set<std::string>>(), jt.at("options").get<std::set<std::string>>()};
    for (const auto& jp : j.at("catalog"))
        t.catalog.push_back({jp.at("id").get<std::string>(), jp.at("type").get<std::string>(),
                             jp.at("price").get<double>(), jp.at("attributes").get<std::set<std::string>>(),
                             jp.at("options").get<std::set<std::string>>()});
    validate(t);
    return t;
}

}  // namespace autoguide::sim
