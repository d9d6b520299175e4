fn main() {
    std::process::exit(frontier_bench::cli::run(std::env::args_os()));
}
