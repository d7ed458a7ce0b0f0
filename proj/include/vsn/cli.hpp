#ifndef VSN_CLI_HPP_
#define VSN_CLI_HPP_

namespace vsn {

// Exit codes: 0 ok, 1 usage, 2 data error, 3 numerical divergence.
int run_cli(int argc, const char* const* argv);

}  // namespace vsn

#endif  // VSN_CLI_HPP_
