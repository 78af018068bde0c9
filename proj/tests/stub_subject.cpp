// Scriptable subject for adapter and session tests. Reads one prompt per
// line on stdin and answers according to the mode:
//   --echo          reply with the prompt
//   --keys FILE     reply with the answer for the prompt from a TSV file
//                   (prompt<TAB>answer); unknown prompts get "unknown"
//   --silent        never reply
//   --exit          exit without replying
//   --refuse        reply with an empty line
#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <thread>

int main(int argc, char** argv) {
  const std::string mode = argc > 1 ? argv[1] : "--echo";
  std::map<std::string, std::string> keys;
  if (mode == "--keys") {
    if (argc < 3) return 2;
    std::ifstream in(argv[2]);
    std::string line;
    while (std::getline(in, line)) {
      const auto tab = line.find('\t');
      if (tab != std::string::npos) keys[line.substr(0, tab)] = line.substr(tab + 1);
    }
  }
  if (mode == "--exit") return 3;
  std::string prompt;
  while (std::getline(std::cin, prompt)) {
    if (mode == "--silent") {
      std::this_thread::sleep_for(std::chrono::hours(1));
    } else if (mode == "--refuse") {
      std::cout << "\n" << std::flush;
    } else if (mode == "--keys") {
      auto it = keys.find(prompt);
      std::cout << (it == keys.end() ? std::string("unknown") : it->second) << "\n" << std::flush;
    } else {
      std::cout << prompt << "\n" << std::flush;
    }
  }
  return 0;
}
