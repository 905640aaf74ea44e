#include "cli.hpp"
#include "recipes.hpp"

#include <cmath>
#include <numbers>

namespace besovwf::cli {

namespace {

constexpr double kPi = std::numbers::pi;

json scan_recipe(json object, std::vector<double> alphas, double norm_alpha, json points)
{
    return {
        {"grid", {{"dim", 2}, {"n", 512}}},
        {"object", std::move(object)},
        {"norm", {{"alpha", norm_alpha}}},
        {"analysis", {{"alphas", std::move(alphas)}}},
        {"points", {{"cells", std::move(points)}}},
        {"output", {{"csv", true}, {"pgm", false}}},
    };
}

json fan_points(double radius)
{
    json pts = json::array();
    for (int i = 0; i < 8; ++i) {
        const double th = 2.0 * kPi * i / 8.0;
        pts.push_back({{"x", {kPi, kPi}}, {"xi", {radius * std::cos(th), radius * std::sin(th)}}});
    }
    return pts;
}

json build(const std::string& name)
{
    if (name == "paper-delta")
        return scan_recipe({{"kind", "delta"}}, {-2.5, -1.5}, -2.0, {{256, 256}, {272, 256}});
    if (name == "paper-ddelta")
        return scan_recipe({{"kind", "ddelta"}, {"axis", 0}}, {-3.5, -2.5}, -3.0, {{256, 256}, {272, 256}});
    if (name == "paper-sqrt")
        return scan_recipe({{"kind", "sqrt"}}, {0.3, 0.7}, 0.5, {{256, 256}});
    if (name == "smooth")
        return scan_recipe({{"kind", "gaussian"}, {"width", 0.3}}, {0.5, 2.0}, 1.0, {{256, 256}, {288, 256}});
    if (name == "line-delta")
        return scan_recipe({{"kind", "line-delta"}, {"axis", 0}}, {-1.5, -0.5}, -1.0,
                           {{256, 256}, {256, 320}, {288, 256}});
    if (name == "young-product")
        return {
            {"grid", {{"dim", 1}, {"n", 4096}}},
            {"analysis", {{"alphas", {0.45, 0.75}}}},
            {"product",
             {{"left", {{"kind", "weierstrass"}, {"alpha", 0.6}, {"phase_seed", 1}}},
              {"right", {{"kind", "weierstrass"}, {"alpha", 0.7}, {"phase_seed", 2}}},
              {"alpha", 0.6},
              {"beta", 0.7},
              {"points", {{"cells", {{2048}, {1024}}}}},
              {"symbolic",
               {{"left", {{"dim", 1}, {"items", {{{"point", {nullptr}}, {"dir", nullptr}, {"half_angle", "full"},
                                                    {"alpha", 0.6}, {"zero_section", true}}}}}},
                {"right", {{"dim", 1}, {"items", {{{"point", {nullptr}}, {"dir", nullptr}, {"half_angle", "full"},
                                                     {"alpha", 0.7}, {"zero_section", true}}}}}}}}}},
        };
    if (name == "halfwave-delta")
        return {
            {"grid", {{"dim", 2}, {"n", 256}}},
            {"object", {{"kind", "delta"}}},
            {"evolve", {{"symbol", {{"kind", "halfwave"}}}, {"times", {0.25, 0.5}}, {"flow_points", fan_points(64.0)}}},
            {"flow", {{"symbol", {{"kind", "halfwave"}}}, {"times", {0.25, 0.5}}, {"points", fan_points(64.0)}}},
        };
    if (name == "identity-diffeo")
        return {
            {"wfalgebra",
             {{"operation", "pullback"},
              {"wf", {{"dim", 2},
                      {"items", {{{"point", {kPi, kPi}}, {"dir", nullptr}, {"half_angle", "full"}, {"alpha", -2.0},
                                  {"zero_section", true}},
                                 {{"point", {kPi, 1.0}}, {"dir", {1.0, 0.0}}, {"half_angle", 0.2}, {"alpha", -1.0},
                                  {"zero_section", false}}}}}},
              {"map", {{"matrix", {{1.0, 0.0}, {0.0, 1.0}}}, {"offset", {0.0, 0.0}}}}}},
        };
    return nullptr;
}

}  // namespace

std::vector<std::string> recipe_names()
{
    return {"paper-delta", "paper-ddelta", "paper-sqrt", "smooth", "line-delta",
            "young-product", "halfwave-delta", "identity-diffeo"};
}

json recipe(const std::string& name)
{
    json r = build(name);
    if (r.is_null()) throw ConfigError("recipe: unknown recipe '" + name + "'");
    return r;
}

}  // namespace besovwf::cli
