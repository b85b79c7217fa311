fn main() {
    std::process::exit(pdfem_cli::main_with(std::env::args_os()));
}
