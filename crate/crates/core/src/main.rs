fn main() {
    std::process::exit(gff_disk::cli::run(std::env::args_os()));
}
