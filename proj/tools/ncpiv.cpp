#include <ncpiv/cli.hpp>

#include <CLI11.hpp>

#include <sstream>

namespace {

std::vector<int> parse_n_list(const std::string& text) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t pos = 0;
        int v = 0;
        try {
            v = std::stoi(item, &pos);
        } catch (const std::exception&) {
            throw ncpiv::cli::usage_error("bad n list entry " + item);
        }
        if (pos != item.size()) throw ncpiv::cli::usage_error("bad n list entry " + item);
        out.push_back(v);
    }
    return out;
}

void add_config_options(CLI::App* app, ncpiv::cli::RunConfig& c, std::string& n_list) {
    app->add_option("--family", c.family, "a, b or scalar")->capture_default_str();
    app->add_option("--nu", c.nu)->capture_default_str();
    app->add_option("--n", c.n)->capture_default_str();
    app->add_option("--s-min", c.s_min)->capture_default_str();
    app->add_option("--s-max", c.s_max)->capture_default_str();
    app->add_option("--s-steps", c.s_steps)->capture_default_str();
    app->add_option("--quad-points", c.quad_points)->capture_default_str();
    app->add_option("--radius", c.radius)->capture_default_str();
    app->add_option("--line-re", c.line_re)->capture_default_str();
    app->add_option("--line-trunc", c.line_trunc)->capture_default_str();
    app->add_option("--step", c.step)->capture_default_str();
    app->add_option("--seed", c.seed)->capture_default_str();
    app->add_option("--out", c.out, "output path, - for stdout")->capture_default_str();
    app->add_option("--format", c.format, "csv or json")->capture_default_str();
    app->add_option("--init", c.init, "painleve initial data (JSON)");
    app->add_option("--n-list", n_list, "airy: comma-separated subset of 8,16,32,64");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"matrix Hermite kernels, Fredholm determinants and Painleve IV experiments"};
    app.require_subcommand(1);
    ncpiv::cli::RunConfig config;
    std::string n_list = "8,16,32,64";
    const char* names[] = {"verify", "fredholm-scan", "painleve", "airy"};
    for (const char* name : names) add_config_options(app.add_subcommand(name), config, n_list);
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    try {
        config.n_list = parse_n_list(n_list);
    } catch (const ncpiv::cli::usage_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return ncpiv::cli::run_command(app.get_subcommands().front()->get_name(), config);
}
