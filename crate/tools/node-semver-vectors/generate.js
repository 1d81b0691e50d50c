// Regenerates crates/core/tests/fixtures/node_semver_vectors.json from the
// reference node-semver implementation (v6, strict mode).
//
//   npm install semver@6.3.1
//   node generate.js > ../../crates/core/tests/fixtures/node_semver_vectors.json
'use strict'
const semver = require('semver')

const versions = [
  '1.2.3', '0.0.0', '0.0.1', '0.1.0', '0.1.2', '1.0.0', '1.0.1', '1.1.0',
  '1.2.0', '1.2.4', '1.3.0', '1.9.9', '2.0.0', '2.0.1', '2.4.0', '3.0.0',
  '10.20.30', 'v1.2.3', ' 1.2.3 ', '1.0.0-alpha', '1.0.0-alpha.1',
  '1.0.0-alpha.beta', '1.0.0-beta', '1.0.0-beta.2', '1.0.0-beta.11',
  '1.0.0-rc.1', '1.0.0-0', '1.2.3-beta', '1.2.3-beta.4', '1.2.4-beta',
  '1.3.0-beta', '2.0.0-0', '2.0.0-alpha', '0.0.1-rc', '1.0.0+build.1',
  '1.0.0-alpha+001', '1.0.0+20130313144700', '1.0.0-x.7.z.92',
  '1.0.0-0A.is.legal', '1.2.3-0a', '9007199254740991.0.0',
  // invalid as strict versions
  '1.2', '1', '', 'a.b.c', '01.2.3', '1.02.3', '1.2.03', '1.2.3-01',
  '1.2.3-', '1.2.3+', '1.2.3-beta..1', '1.2.3.4', '=1.2.3', 'vv1.2.3',
  '-1.2.3', '1.2.3-beta!', '9007199254740992.0.0', 'V1.2.3', '1.2.x'
]

const comparePairs = [
  ['1.0.0', '1.0.0'], ['1.0.0-alpha', '1.0.0'], ['1.0.0+build1', '1.0.0+build2'],
  ['1.0.0-alpha', '1.0.0-alpha.1'], ['1.0.0-alpha.1', '1.0.0-alpha.beta'],
  ['1.0.0-alpha.beta', '1.0.0-beta'], ['1.0.0-beta', '1.0.0-beta.2'],
  ['1.0.0-beta.2', '1.0.0-beta.11'], ['1.0.0-beta.11', '1.0.0-rc.1'],
  ['1.0.0-rc.1', '1.0.0'], ['1.0.0', '2.0.0'], ['2.0.0', '2.1.0'],
  ['2.1.0', '2.1.1'], ['1.9.0', '1.10.0'], ['1.10.0', '1.9.0'],
  ['0.0.1', '0.0.0'], ['1.0.0-0', '1.0.0-alpha'], ['1.0.0-1', '1.0.0-0A'],
  ['1.0.0-a', '1.0.0-B'], ['1.0.0-alpha.1', '1.0.0-alpha'],
  ['1.2.3-beta.4', '1.2.3-beta.10'], ['v1.2.3', '1.2.3'],
  ['1.0.0-x.7.z.92', '1.0.0-x.7.z.93'], ['3.0.0', '2.99.99'],
  ['1.2.3-a.b', '1.2.3-a.b.c'], ['1.2.3-a-b', '1.2.3-a'],
  ['10.0.0', '9.0.0'], ['1.0.0+z', '1.0.0-z']
]

const ranges = [
  '1.2.3', '=1.2.3', 'v1.2.3', '=v1.2.3', '>1.0.0', '>=1.0.0', '<2.0.0',
  '<=2.0.0', '> 1.0.0', '>= 1.2.3 < 2', '^1.2.3', '^0.1.2', '^0.0.1',
  '^1.2', '^1', '^0.1', '^0.0', '^0', '^1.2.x', '^1.x', '^*', '^ 1.2.3',
  '^1.2.3-beta.2', '^0.0.1-beta', '^0.1.2-beta', '~1.2.3', '~1.2', '~1',
  '~0.2.3', '~1.2.3-beta.2', '~> 1.2.3', '~>1.2', '~ 1.2', '~*', '~1.x',
  '1.2.3 - 2.3.4', '1.2 - 2.3.4', '1.2.3 - 2.3', '1.2.3 - 2', '1 - 2',
  '1.2.3 - 2.3.4-beta', '1.2.3-beta - 2.3.4', '* - 2', '1.2.3 - *',
  '*', '', 'x', 'X', '1.x', '1.X', '1.2.x', '1.*', '1.2.*', '1.x.x', '1',
  '1.2', '>1', '>1.2', '>1.x', '<1', '<1.2', '<=1', '<=1.2', '>=1', '>=1.2',
  '=1.2', '<x', '>x', '>=*', '<=*', '=*', '1.x || >=2.5.0 || 5.0.0 - 7.2.3',
  '1.2.3 || 2.x', '<1.0.0 || >=2.0.0', '^1.0.0 || ^2.0.0', '1.2.3 ||',
  '>=1.0.0-alpha <1.0.0', '>1.2.3-alpha.3', '>=1.2.3-beta <1.3.0',
  '>=0.0.0', '<0.0.0', '1.2.3 1.2.4', '>=1.2.7 <1.3.0', '>=1.0.0 <=1.0.0',
  '1.2.3+build', '^1.2.3+build', '>=1.2.3+build', '  ^1.2.3  ',
  // invalid
  'latest', 'next', 'git+https://github.com/a/b.git', 'a/b',
  'file:../x', '>=', '^', '~', '1.2.3.4', '>01.2.3', '^01.2.3',
  '>=1.2.3 <', '1.2.3 - ', 'a.b.c', '>=a', '^1.2.3-01', '==1.2.3',
  '>>1.2.3', 'v=1.2.3', '1.2.3 -- 2.0.0', '<=>1.0.0', 'x.1.2'
]

const satisfyVersions = [
  '0.0.0', '0.0.1', '0.0.2', '0.1.0', '0.1.2', '0.1.5', '0.2.0', '0.2.3',
  '1.0.0', '1.0.0-alpha', '1.0.0-beta', '1.0.1', '1.1.0', '1.2.0', '1.2.2',
  '1.2.3', '1.2.3-beta', '1.2.3-beta.2', '1.2.3-beta.4', '1.2.4',
  '1.2.4-beta', '1.2.7', '1.3.0', '1.3.0-beta', '1.9.9', '2.0.0',
  '2.0.0-alpha', '2.3.4', '2.3.4-beta', '2.3.5', '2.4.0', '2.5.0',
  '3.0.0', '5.0.0', '6.1.0', '7.2.3', '7.2.4', '0.0.1-beta.2',
  '0.1.2-beta.3', '1.2.3+build.9', 'not-a-version'
]

const out = { generator: 'node-semver ' + require('semver/package.json').version }

out.parse = versions.map(function (input) {
  let v = null
  try { v = new semver.SemVer(input) } catch (e) { v = null }
  if (!v) return { input: input, valid: false }
  return {
    input: input,
    valid: true,
    major: v.major,
    minor: v.minor,
    patch: v.patch,
    prerelease: v.prerelease.map(String),
    build: v.build,
    canonical: v.version
  }
})

out.compare = comparePairs.map(function (p) {
  return { a: p[0], b: p[1], order: semver.compare(p[0], p[1]) }
})

out.ranges = ranges.map(function (input) {
  let r = null
  try { r = new semver.Range(input) } catch (e) { r = null }
  if (!r) return { input: input, valid: false }
  return {
    input: input,
    valid: true,
    desugared: r.set.map(function (set) {
      return set.map(function (c) { return c.value }).filter(function (s) { return s !== '' })
    })
  }
})

out.satisfies = []
ranges.forEach(function (range) {
  let ok = true
  try { new semver.Range(range) } catch (e) { ok = false }
  if (!ok) return
  satisfyVersions.forEach(function (version) {
    out.satisfies.push({ version: version, range: range, result: semver.satisfies(version, range) })
  })
})

process.stdout.write(JSON.stringify(out, null, 1) + '\n')
