//! Code manifests: the interface and storage layout of each contract kind.
//!
//! A manifest is what a deployment ships instead of EVM bytecode. Factories
//! embed the creation code of the child they instantiate, so a parent's
//! manifest contains its child's manifest verbatim.

use super::ContractKind;

const USER_METADATA: &str = "\
contract UserMetadata {
  address public publicAddress;
  string public username;
  string public organization;
  string public country;
  address public factory;
  event UserMetadataCreated(address indexed publicAddress, string username, string organization, string country);
  constructor(address _publicAddress, string memory _username, string memory _organization, string memory _country);
  function getPublicAddress() public view returns (address);
  function getUsername() public view returns (string memory);
  function getOrganization() public view returns (string memory);
  function getCountry() public view returns (string memory);
  function getUserDetails() public view returns (address, string memory, string memory, string memory);
  require(bytes(_username).length > 0, \"username must not be empty\");
}
";

const GROUP_CONTRACT: &str = "\
contract GroupContract {
  struct ContractDetails { string groupName; address groupOwnerAddress; string permissions; string[] organizations; string[] countries; }
  struct FileDetails { string IPFSHash; string fileName; address addedBy; uint256 addedAt; }
  struct UserInput { address eoaAddress; uint256 accessFrom; uint256 accessTo; }
  ContractDetails public contractDetails;
  mapping(address => UserInput) private userAccess;
  address[] private members;
  mapping(string => bool) public sharedIPFSHashes;
  FileDetails[] public addedFileDetails;
  address public policyManager;
  event Success(string message);
  modifier onlyGroupOwner() { require(msg.sender == contractDetails.groupOwnerAddress, \"Only group owner can call this function\"); _; }
  constructor(ContractDetails _details);
  function addFilesToGroup(FileDetails[] memory fileDetails) public;
  function associateUsersToGroup(UserInput[] memory users) public onlyGroupOwner;
  function setUserAccess(address eoaAddress, uint256 accessFrom, uint256 accessTo) public onlyGroupOwner;
  function hasAccess(address user, uint256 at) public view returns (bool);
  function getFiles() public view returns (FileDetails[] memory);
  function getMembers() public view returns (address[] memory);
  function getContractDetails() public view returns (ContractDetails memory);
  require(hasAccess(msg.sender, block.timestamp), \"Caller is not an active group member\");
  require(accessFrom <= accessTo, \"Access window starts after it ends\");
  require(!sharedIPFSHashes[IPFSHash], \"File already shared in the group\");
  require(bytes(IPFSHash).length > 0, \"ipfs_hash must not be empty\");
}
";

const USER_METADATA_FACTORY_OWN: &str = "\
contract UserMetadataFactory {
  mapping(address => address) private userContracts;
  address[] private registeredUsers;
  uint256 private childCount;
  event UserCreated(address indexed publicAddress, address userContract);
  event Success(string message);
  modifier onlyUnregistered(address publicAddress) { require(userContracts[publicAddress] == address(0), \"User already registered\"); _; }
  constructor();
  function createUserContract(address publicAddress, string username, string organization, string country) public onlyUnregistered(publicAddress) returns (address);
  function getUserContract(address publicAddress) public view returns (address);
  function isRegistered(address publicAddress) public view returns (bool);
  function getAllUsers() public view returns (address[] memory);
  function getUserCount() public view returns (uint256);
  function getUserContractAt(uint256 index) public view returns (address);
  function getUserContracts(address[] memory publicAddresses) public view returns (address[] memory);
  function getUserDetails(address publicAddress) public view returns (address, string, string, string);
  require(msg.sender == publicAddress, \"Caller does not match the profile public address\");
  require(bytes(username).length > 0, \"username must not be empty\");
  creationCode UserMetadata:
";

const POLICY_MANAGER_OWN: &str = "\
contract PolicyManager {
  UserMetadataFactory public userFactory;
  address[] private groups;
  mapping(address => address[]) private ownerGroups;
  event GroupCreated(address indexed owner, address group);
  event Success(string message);
  constructor(address _userFactory);
  function createGroupContract(string groupName, address groupOwnerAddress, string permissions, string[] organizations, string[] countries) public returns (address);
  function getGroups() public view returns (address[] memory);
  function getGroupsByOwner(address owner) public view returns (address[] memory);
  function getGroupDetails(address group) public view returns (ContractDetails memory);
  require(userFactory.isRegistered(msg.sender), \"User is not registered\");
  require(msg.sender == groupOwnerAddress, \"Caller must be the group owner named in the details\");
  require(bytes(groupName).length > 0, \"group_name must not be empty\");
  creationCode GroupContract:
";

pub fn manifest(kind: ContractKind) -> String {
    match kind {
        ContractKind::UserMetadata => USER_METADATA.to_string(),
        ContractKind::GroupContract => GROUP_CONTRACT.to_string(),
        ContractKind::UserMetadataFactory => {
            [USER_METADATA_FACTORY_OWN, USER_METADATA, "}\n"].concat()
        }
        ContractKind::PolicyManager => [POLICY_MANAGER_OWN, GROUP_CONTRACT, "}\n"].concat(),
    }
}
