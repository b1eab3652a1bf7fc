#include "personagraph/cli.hpp"

#include <cstdlib>
#include <iostream>

int main(int argc, char** argv) {
    personagraph::CliEnvironment env;
    if (const char* token = std::getenv("FORGE_TOKEN")) env.forge_token = token;
    return personagraph::run_cli({argv + 1, argv + argc}, std::cout, std::cerr, env);
}
