#    Licensed under the Apache License, Version 2.0 (the "License"); you may
#    not use this file except in compliance with the License. You may obtain
#    a copy of the License at
#
#         http://www.apache.org/licenses/LICENSE-2.0
#
#    Unless required by applicable law or agreed to in writing, software
#    distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
#    WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
#    License for the specific language governing permissions and limitations
#    under the License.

"""
Multi-level POD and Gaussian-process surrogates of the steady temperature
in curved 2-D domains.
"""

from __future__ import print_function
import argparse
import logging
import sys

from oslo_utils import encodeutils

import curvirom
from curvirom import commands
from curvirom import conf
from curvirom import exceptions as exc
from curvirom.i18n import _
from curvirom import utils

logger = logging.getLogger(__name__)

STREAM_FORMAT = "%(levelname)s (%(module)s:%(lineno)d) %(message)s"

# global flag dest -> run config option
OVERRIDE_OPTIONS = ('seed', 'strict', 'mode', 'levels', 'base_dims',
                    'threads')


class CurviromArgumentParser(argparse.ArgumentParser):

    def error(self, message):
        """error(message: string)

        Prints a usage message incorporating the message to stderr and
        exits.
        """
        self.print_usage(sys.stderr)
        choose_from = ' (choose from'
        progparts = self.prog.partition(' ')
        self.exit(2, _("error: %(errmsg)s\nTry '%(mainp)s help %(subp)s'"
                       " for more information.\n") %
                  {'errmsg': message.split(choose_from)[0],
                   'mainp': progparts[0],
                   'subp': progparts[2]})


class CurviromShell(object):

    def __init__(self):
        self.times = []
        self.subcommands = {}
        self.parser = None
        self.ctx = None

    def get_base_parser(self):
        parser = CurviromArgumentParser(
            prog='curvirom',
            description=__doc__.strip(),
            epilog='See "curvirom help COMMAND" '
                   'for help on a specific command.',
            add_help=False,
            formatter_class=CurviromHelpFormatter,
        )

        # Global arguments
        parser.add_argument(
            '-h', '--help',
            action='store_true',
            help=argparse.SUPPRESS,
        )

        parser.add_argument('--version',
                            action='version',
                            version=curvirom.__version__)

        parser.add_argument(
            '--debug',
            default=False,
            action='store_true',
            help=_("Print debugging output."))

        parser.add_argument(
            '--verbose',
            default=False,
            action='store_true',
            help=_("Print progress messages."))

        parser.add_argument(
            '--timings',
            default=False,
            action='store_true',
            help=_("Print call timing info."))

        parser.add_argument(
            '--config',
            metavar='<file>',
            default=utils.env('CURVIROM_CONFIG'),
            help=_("File of 'key = value' options. "
                   "Defaults to env[CURVIROM_CONFIG]."))

        parser.add_argument(
            '--out',
            metavar='<dir>',
            default='.',
            help=_("Directory for run outputs. Defaults to the current "
                   "directory."))

        parser.add_argument(
            '--seed',
            metavar='<seed>',
            type=int,
            default=None,
            help=_("Seed for sampling, splitting and GP restarts."))

        parser.add_argument(
            '--strict',
            action='store_const',
            const=True,
            default=None,
            help=_("Reject geometry parameters outside the bounds instead "
                   "of warning."))

        parser.add_argument(
            '--mode',
            metavar='<mode>',
            choices=conf.MODES,
            default=None,
            help=_("Surrogate mode: %s.") %
            utils.pretty_choice_list(conf.MODES))

        parser.add_argument(
            '--levels',
            metavar='<count>',
            type=int,
            default=None,
            help=_("Number of mesh levels."))

        parser.add_argument(
            '--base-dims',
            metavar='<HxW>',
            default=None,
            help=_("Node counts of the coarsest level, eta x xi."))

        parser.add_argument(
            '--threads', '--workers',
            dest='threads',
            metavar='<count>',
            type=int,
            default=None,
            help=_("Worker processes for sample generation and GP "
                   "training. Defaults to env[%s] or 1.") % conf.THREADS_ENV)

        return parser

    def get_subcommand_parser(self):
        parser = self.get_base_parser()

        self.subcommands = {}
        subparsers = parser.add_subparsers(metavar='<subcommand>')

        self._find_actions(subparsers, commands)
        self._find_actions(subparsers, self)

        self._add_bash_completion_subparser(subparsers)

        return parser

    def _add_bash_completion_subparser(self, subparsers):
        subparser = subparsers.add_parser(
            'bash_completion',
            add_help=False,
            formatter_class=CurviromHelpFormatter
        )
        self.subcommands['bash_completion'] = subparser
        subparser.set_defaults(func=self.do_bash_completion)

    def _find_actions(self, subparsers, actions_module):
        for attr in (a for a in dir(actions_module) if a.startswith('do_')):
            # I prefer to be hyphen-separated instead of underscores.
            command = attr[3:].replace('_', '-')
            callback = getattr(actions_module, attr)
            desc = callback.__doc__ or ''
            action_help = desc.strip().split('\n')[0]
            arguments = getattr(callback, 'arguments', [])

            subparser = subparsers.add_parser(
                command,
                help=action_help,
                description=desc,
                add_help=False,
                formatter_class=CurviromHelpFormatter)
            subparser.add_argument(
                '-h', '--help',
                action='help',
                help=argparse.SUPPRESS,
            )
            self.subcommands[command] = subparser
            for (args, kwargs) in arguments:
                subparser.add_argument(*args, **kwargs)
            subparser.set_defaults(func=callback)

    def setup_logging(self, debug, verbose=False):
        if debug:
            level = logging.DEBUG
        elif verbose:
            level = logging.INFO
        else:
            level = logging.WARNING
        logging.basicConfig(level=level, format=STREAM_FORMAT)
        logging.getLogger('numba').setLevel(logging.WARNING)

    def _overrides(self, args):
        return dict((key, getattr(args, key)) for key in OVERRIDE_OPTIONS
                    if getattr(args, key, None) is not None)

    def main(self, argv):
        # Parse args once to find debug settings
        parser = self.get_base_parser()
        (args, args_list) = parser.parse_known_args(argv)

        self.setup_logging(args.debug, args.verbose)

        subcommand_parser = self.get_subcommand_parser()
        self.parser = subcommand_parser

        if args.help or not argv:
            subcommand_parser.print_help()
            return 0

        args = subcommand_parser.parse_args(argv)

        # Short-circuit and deal with help right away.
        if args.func == self.do_help:
            self.do_help(args)
            return 0
        elif args.func == self.do_bash_completion:
            self.do_bash_completion(args)
            return 0

        overrides = self._overrides(args)
        config = conf.resolve(config_file=args.config, overrides=overrides,
                              command=args_list[0] if args_list else None)
        conf.log_config(config)
        self.ctx = commands.Context(config, out_dir=args.out,
                                    timings=args.timings,
                                    overrides=overrides)

        args.func(self.ctx, args)

        if args.timings:
            self._dump_timings(self.times + self.ctx.times)

    def _dump_timings(self, timings):
        class Tyme(object):
            def __init__(self, action, seconds):
                self.action = action
                self.seconds = seconds
        results = [Tyme(action, end - start)
                   for action, start, end in timings]
        total = 0.0
        for tyme in results:
            total += tyme.seconds
        results.append(Tyme("Total", total))
        utils.print_list(results, ["action", "seconds"], sortby_index=None)

    def do_bash_completion(self, _args):
        """
        Prints all of the commands and options to stdout so that the
        curvirom.bash_completion script doesn't have to hard code them.
        """
        names = set()
        options = set()
        for sc_str, sc in self.subcommands.items():
            names.add(sc_str)
            for option in sc._optionals._option_string_actions.keys():
                options.add(option)

        names.remove('bash-completion')
        names.remove('bash_completion')
        print(' '.join(names | options))

    @utils.arg(
        'command',
        metavar='<subcommand>',
        nargs='?',
        help=_('Display help for <subcommand>.'))
    def do_help(self, args):
        """
        Display help about this program or one of its subcommands.
        """
        if args.command:
            if args.command in self.subcommands:
                self.subcommands[args.command].print_help()
            else:
                raise exc.CommandError(_("'%s' is not a valid subcommand") %
                                       args.command)
        else:
            self.parser.print_help()


# I'm picky about my shell help.
class CurviromHelpFormatter(argparse.HelpFormatter):
    def __init__(self, prog, indent_increment=2, max_help_position=32,
                 width=None):
        super(CurviromHelpFormatter, self).__init__(prog, indent_increment,
                                                    max_help_position, width)

    def start_section(self, heading):
        # Title-case the headings
        heading = '%s%s' % (heading[0].upper(), heading[1:])
        super(CurviromHelpFormatter, self).start_section(heading)


def main():
    try:
        argv = [encodeutils.safe_decode(a) for a in sys.argv[1:]]
        CurviromShell().main(argv)
    except Exception as exc:
        logger.debug(exc, exc_info=1)
        print(_("ERROR (%(type)s): %(msg)s") % {
              'type': exc.__class__.__name__,
              'msg': encodeutils.exception_to_unicode(exc)},
              file=sys.stderr)
        sys.exit(1)
    except KeyboardInterrupt:
        print(_("... terminating curvirom"), file=sys.stderr)
        sys.exit(130)


if __name__ == "__main__":
    main()
