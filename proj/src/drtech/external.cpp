#include <atomic>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include "dradapt/drtech.hpp"
#include "dradapt/error.hpp"

namespace dradapt {
namespace {

std::atomic<std::uint64_t> g_invocation{0};

// Removes the scratch directory on scope exit.
class ScratchDir {
public:
    ScratchDir() {
        const auto stamp = std::to_string(::getpid()) + "-" + std::to_string(g_invocation.fetch_add(1));
        path_ = std::filesystem::temp_directory_path() / ("dradapt-ext-" + stamp);
        std::filesystem::create_directories(path_);
    }
    ~ScratchDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;

    const std::filesystem::path& path() const noexcept { return path_; }

private:
    std::filesystem::path path_;
};

std::string read_text(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_all(int fd, const std::string& data) {
    std::size_t off = 0;
    while (off < data.size()) {
        const ssize_t w = ::write(fd, data.data() + off, data.size() - off);
        if (w < 0) {
            if (errno == EINTR) continue;
            return;  // child closed stdin early; its exit status tells the story
        }
        off += static_cast<std::size_t>(w);
    }
}

}  // namespace

Projection run_external(const TechniqueDescriptor& t, const Dataset& ds, const HyperparamAssignment& h,
                        std::uint64_t seed) {
    if (t.kind != TechniqueKind::External || !t.external) {
        throw ValidationError("technique '" + t.id + "' is not external");
    }
    validate_assignment(t.external->space, h);

    ScratchDir scratch;
    const auto input = scratch.path() / "input.csv";
    const auto output = scratch.path() / "output.csv";
    const auto log = scratch.path() / "stderr.txt";
    write_dataset(Dataset(ds.points(), std::nullopt, ds.name()), input);

    std::vector<std::string> args = t.external->argv;
    args.insert(args.end(), {"--input", input.string(), "--output", output.string()});
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    argv.push_back(nullptr);
    const std::string seed_env = std::to_string(seed);

    int stdin_pipe[2];
    if (::pipe(stdin_pipe) != 0) throw ExternalTechniqueError("cannot create pipe", -1, std::strerror(errno));

    const pid_t pid = ::fork();
    if (pid < 0) {
        ::close(stdin_pipe[0]);
        ::close(stdin_pipe[1]);
        throw ExternalTechniqueError("cannot fork", -1, std::strerror(errno));
    }
    if (pid == 0) {
        ::dup2(stdin_pipe[0], STDIN_FILENO);
        ::close(stdin_pipe[0]);
        ::close(stdin_pipe[1]);
        const int err = ::open(log.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
        if (err >= 0) {
            ::dup2(err, STDERR_FILENO);
            ::dup2(err, STDOUT_FILENO);
            ::close(err);
        }
        ::setenv("DRADAPT_SEED", seed_env.c_str(), 1);
        ::execvp(argv[0], argv.data());
        std::fprintf(stderr, "exec %s: %s\n", argv[0], std::strerror(errno));
        ::_exit(127);
    }

    ::close(stdin_pipe[0]);
    // A child that exits without reading stdin must not kill us with SIGPIPE.
    struct sigaction ignore {}, previous {};
    ignore.sa_handler = SIG_IGN;
    ::sigaction(SIGPIPE, &ignore, &previous);
    write_all(stdin_pipe[1], to_json(h).dump() + "\n");
    ::close(stdin_pipe[1]);
    ::sigaction(SIGPIPE, &previous, nullptr);

    int status = 0;
    while (::waitpid(pid, &status, 0) < 0) {
        if (errno != EINTR) throw ExternalTechniqueError("waitpid failed", -1, std::strerror(errno));
    }
    const std::string diagnostics = read_text(log);
    if (!WIFEXITED(status)) {
        throw ExternalTechniqueError("external technique '" + t.id + "' terminated abnormally", -1, diagnostics);
    }
    const int code = WEXITSTATUS(status);
    if (code != 0) {
        throw ExternalTechniqueError("external technique '" + t.id + "' exited with code " + std::to_string(code),
                                     code, diagnostics);
    }
    if (!std::filesystem::exists(output)) {
        throw ExternalTechniqueError("external technique '" + t.id + "' wrote no output", 0, diagnostics);
    }

    RowMatrix y;
    try {
        // Parse through the dataset reader; it rejects ragged or non-numeric rows.
        RowMatrix raw = parse_dataset(read_text(output), {}, t.id).points();
        y = std::move(raw);
    } catch (const Error& e) {
        throw ExternalTechniqueError("external technique '" + t.id + "' produced malformed output: " + e.what(), 0,
                                     diagnostics);
    }
    if (static_cast<std::size_t>(y.rows()) != ds.size() || y.cols() != 2) {
        throw ExternalTechniqueError("external technique '" + t.id + "' produced " + std::to_string(y.rows()) + "x" +
                                         std::to_string(y.cols()) + " output, expected " +
                                         std::to_string(ds.size()) + "x2",
                                     0, diagnostics);
    }
    return Projection(std::move(y));
}

}  // namespace dradapt
