fn main() {
    std::process::exit(coordctl::execute(std::env::args_os()));
}
