try:
    from setuptools import setup
except ImportError:
    from distutils.core import setup


def version():
    with open('covidchain.py') as fo:
        for line in fo:
            if '__version__' not in line:
                continue
            # "__version__ = '0.3.0'" -> "0.3.0"
            return line.split('=')[1].strip().replace("'", '')


def readme():
    with open('README.md') as fo:
        return fo.read()


setup(
    name='covidchain',
    version=version(),
    description='Markov chain model of COVID-19 progression in Mexico City',
    long_description=readme(),
    long_description_content_type='text/markdown',
    author='covidchain contributors',
    license='MIT',
    py_modules=['covidchain', 'argumenthandler', 'reportservice', 'markovchain', 'estimation', 'horizontable',
                'horizonfit', 'simulation', 'datafiles', 'finding', 'numberformat'],
    data_files=[('data', ['data/table1_delegations.csv', 'data/table2_regions.csv', 'data/table3_crossed.csv',
                          'data/table4_cdmx.csv', 'data/table5_tlalpan.csv', 'data/table6_gustavo_a_madero.csv',
                          'data/table7_iztapalapa.csv', 'data/table8_alvaro_obregon.csv'])],
    python_requires='>=3.8',
    install_requires=['numpy>=1.17', 'PyYAML'],
    tests_require=['pytest', 'flake8', 'tox'],
    entry_points={'console_scripts': ['covidchain = covidchain:main']},
    classifiers=[
        'Development Status :: 4 - Beta',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: MIT License',
        'Programming Language :: Python',
        'Programming Language :: Python :: 3',
        'Topic :: Scientific/Engineering :: Medical Science Apps.',
        'Topic :: Scientific/Engineering :: Mathematics',
    ],
)
