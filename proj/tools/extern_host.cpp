// snapseed-extern-host TABLE.json
//
// Reference extern host: answers newline-delimited requests on stdin with
// canned values from the table, keyed by function name.

#include "snapseed/extern_host.hpp"
#include "snapseed/registry.hpp"

#include <iostream>

int main(int argc, char **argv) {
  if (argc != 2) {
    std::cerr << "usage: snapseed-extern-host TABLE.json\n";
    return 2;
  }
  try {
    auto table = nlohmann::json::parse(snapseed::read_text_file(argv[1]));
    std::ios::sync_with_stdio(false);
    snapseed::serve_extern_requests(table, std::cin, std::cout);
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
