fn main() {
    std::process::exit(mcp_hetnet::cli::run(std::env::args_os()));
}
